#include "doctest.h"

#include "dflow/catalog.hpp"
#include "test_util.hpp"

using namespace dflow;
using testutil::fixture_catalogs;

namespace {

const ServiceCatalog& fixture_catalog() {
    return fixture_catalogs().catalogs.at("http://services.example/catalog.json");
}

}  // namespace

TEST_CASE("catalog loads services, ports, and ordered signatures") {
    const ServiceCatalog& cat = fixture_catalog();
    CHECK(cat.description_id == "example-services");  // the document's own id
    CHECK(cat.services.size() == 6);

    const ServiceDesc* s1 = cat.find_service("Service1");
    REQUIRE(s1 != nullptr);
    REQUIRE(s1->ports.size() == 1);
    CHECK(s1->ports[0].name == "Port1");
    CHECK(s1->ports[0].endpoint == "http://svc1.example/api");

    const OperationSig& mix = lookup_operation(cat, "Service1", "Port1", "Mix");
    REQUIRE(mix.inputs.size() == 2);
    CHECK(mix.inputs[0].first == "i");  // declaration order is binding order
    CHECK(mix.inputs[0].second == TypeExpr::of(BaseType::Int));
    CHECK(mix.inputs[1].first == "s");
    CHECK(mix.inputs[1].second == TypeExpr::of(BaseType::String));
    CHECK(mix.output == TypeExpr::of(BaseType::String));

    const OperationSig& ping = lookup_operation(cat, "Service1", "Port1", "Ping");
    CHECK(ping.inputs.empty());
    CHECK(ping.output == TypeExpr::of(BaseType::Boolean));

    const OperationSig& describe = lookup_operation(cat, "Service1", "Port1", "Describe");
    REQUIRE(describe.inputs.size() == 1);
    CHECK(describe.inputs[0].second == TypeExpr::complex("types.example", "newType"));
}

TEST_CASE("catalog JSON round-trips") {
    const ServiceCatalog& cat = fixture_catalog();
    ServiceCatalog again = load_catalog(catalog_to_json(cat), "round-trip");
    CHECK(again.description_id == cat.description_id);
    REQUIRE(again.services.size() == cat.services.size());
    for (size_t i = 0; i < cat.services.size(); ++i) {
        CHECK(again.services[i].name == cat.services[i].name);
        REQUIRE(again.services[i].ports.size() == cat.services[i].ports.size());
        const auto& p0 = cat.services[i].ports[0];
        const auto& p1 = again.services[i].ports[0];
        CHECK(p1.endpoint == p0.endpoint);
        REQUIRE(p1.operations.size() == p0.operations.size());
        for (size_t k = 0; k < p0.operations.size(); ++k) {
            CHECK(p1.operations[k].name == p0.operations[k].name);
            CHECK(p1.operations[k].inputs == p0.operations[k].inputs);
            CHECK(p1.operations[k].output == p0.operations[k].output);
        }
    }
}

TEST_CASE("operation lookup reports the missing level") {
    const ServiceCatalog& cat = fixture_catalog();
    CHECK_THROWS_WITH_AS(lookup_operation(cat, "Nope", "Port1", "Op1"),
                         doctest::Contains("UnknownService"), CompileError);
    CHECK_THROWS_WITH_AS(lookup_operation(cat, "Service1", "Nope", "Op1"),
                         doctest::Contains("UnknownPort"), CompileError);
    CHECK_THROWS_WITH_AS(lookup_operation(cat, "Service1", "Port1", "Nope"),
                         doctest::Contains("UnknownOperation"), CompileError);
}

TEST_CASE("catalog loader rejects malformed documents") {
    auto load = [](const char* text) { return load_catalog_text(text, "test"); };
    CHECK_THROWS_WITH_AS(load("not json"), doctest::Contains("FormatError"), CompileError);
    CHECK_THROWS_WITH_AS(load("{\"services\": []}"), doctest::Contains("FormatError"),
                         CompileError);
    CHECK_THROWS_WITH_AS(
        load(R"({"description": "d", "services": [{"name": "S"}]})"),
        doctest::Contains("FormatError"), CompileError);
    CHECK_THROWS_WITH_AS(
        load(R"({"description": "d", "services": [
            {"name": "S", "ports": [{"name": "P", "endpoint": "e", "operations": [
                {"name": "Op", "inputs": [{"name": "x", "type": "whatsit"}], "output": "string"}
            ]}]}]})"),
        doctest::Contains("FormatError"), CompileError);
}

TEST_CASE("catalog loader rejects duplicate names at every level") {
    auto dup_services = R"({"description": "d", "services": [
        {"name": "S", "ports": []}, {"name": "S", "ports": []}]})";
    CHECK_THROWS_WITH_AS(load_catalog_text(dup_services, "test"),
                         doctest::Contains("DuplicateName"), CompileError);

    auto dup_ops = R"({"description": "d", "services": [
        {"name": "S", "ports": [{"name": "P", "endpoint": "e", "operations": [
            {"name": "Op", "output": "string"}, {"name": "Op", "output": "string"}
        ]}]}]})";
    CHECK_THROWS_WITH_AS(load_catalog_text(dup_ops, "test"),
                         doctest::Contains("DuplicateName"), CompileError);
}

TEST_CASE("schema loads field lists and nested complex types") {
    const TypeSchema& schema = fixture_catalogs().schemas.at("http://types.example/types.json");
    CHECK(schema.schema_id == "types.example");
    const TypeDef* nt = schema.find_type("newType");
    REQUIRE(nt != nullptr);
    REQUIRE(nt->fields.size() == 2);
    CHECK(nt->fields[0].first == "f1");
    CHECK(nt->fields[0].second == TypeExpr::of(BaseType::Int));
    const TypeDef* pair = schema.find_type("pairType");
    REQUIRE(pair != nullptr);
    CHECK(pair->fields[0].second == TypeExpr::complex("types.example", "newType"));
}

TEST_CASE("schema loader rejects foreign references and recursion") {
    auto foreign = R"({"schema": "s1", "types": [
        {"name": "A", "fields": [{"name": "f", "type": "other:Thing"}]}]})";
    CHECK_THROWS_WITH_AS(load_schema_text(foreign, "test"),
                         doctest::Contains("foreign schema"), CompileError);

    auto unknown = R"({"schema": "s1", "types": [
        {"name": "A", "fields": [{"name": "f", "type": "s1:Missing"}]}]})";
    CHECK_THROWS_WITH_AS(load_schema_text(unknown, "test"),
                         doctest::Contains("unknown type"), CompileError);

    auto self_rec = R"({"schema": "s1", "types": [
        {"name": "A", "fields": [{"name": "f", "type": "s1:A"}]}]})";
    CHECK_THROWS_WITH_AS(load_schema_text(self_rec, "test"),
                         doctest::Contains("recursive"), CompileError);

    auto mutual = R"({"schema": "s1", "types": [
        {"name": "A", "fields": [{"name": "f", "type": "s1:B"}]},
        {"name": "B", "fields": [{"name": "g", "type": "s1:A"}]}]})";
    CHECK_THROWS_WITH_AS(load_schema_text(mutual, "test"),
                         doctest::Contains("recursive"), CompileError);
}

TEST_CASE("type strings round-trip") {
    for (const char* text : {"any", "int", "string", "types.example:newType",
                             "(int,string)", "(any,(int,string))"}) {
        CAPTURE(text);
        CHECK(type_to_string(type_from_string(text)) == text);
    }
    CHECK_THROWS_AS(type_from_string("whatsit"), CompileError);
    CHECK_THROWS_AS(type_from_string("(int,string"), CompileError);
}

TEST_CASE("type compatibility: any both ways, exact bases, canonical complex") {
    TypeExpr any = TypeExpr::any();
    TypeExpr i = TypeExpr::of(BaseType::Int);
    TypeExpr s = TypeExpr::of(BaseType::String);
    CHECK(compatible(any, i));
    CHECK(compatible(i, any));
    CHECK(compatible(i, i));
    CHECK_FALSE(compatible(i, s));
    CHECK_FALSE(compatible(TypeExpr::of(BaseType::Float), TypeExpr::of(BaseType::Double)));

    TypeExpr c1 = TypeExpr::complex("types.example", "newType");
    TypeExpr c2 = TypeExpr::complex("types.example", "pairType");
    CHECK(compatible(c1, c1));
    CHECK_FALSE(compatible(c1, c2));
    CHECK(compatible(c1, any));

    TypeExpr t1 = TypeExpr::tuple({i, s});
    TypeExpr t2 = TypeExpr::tuple({i, s});
    TypeExpr t3 = TypeExpr::tuple({s, s});
    CHECK(compatible(t1, t2));
    CHECK_FALSE(compatible(t1, t3));
    CHECK_FALSE(compatible(t1, TypeExpr::tuple({i})));
    CHECK(compatible(t1, any));
}
