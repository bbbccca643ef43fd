#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "dwell/config.hpp"
#include "dwell/errors.hpp"

using namespace dwell;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::MessageMatches;

namespace {

const char* kSample = R"ini(
# run description
[experiment]
regime = weak          ; trailing comment
label  = demo
t_final = 1.5

[model]
N = 5000
kappa = 100
dims = 3, 4,5
)ini";

}  // namespace

TEST_CASE("config: parses sections, keys, comments, whitespace", "[config]") {
    const Config c = Config::parse_string(kSample, "sample.ini");
    CHECK(c.origin() == "sample.ini");
    CHECK(c.has_section("experiment"));
    CHECK(c.has_section("model"));
    CHECK_FALSE(c.has_section("integrator"));
    CHECK(c.has("experiment", "regime"));
    CHECK_FALSE(c.has("experiment", "missing"));

    CHECK(c.get_string("experiment", "regime") == "weak");
    CHECK(c.get_string("experiment", "label") == "demo");
    CHECK(c.get_double("experiment", "t_final") == 1.5);
    CHECK(c.get_int("model", "N") == 5000);
    CHECK(c.get_double("model", "kappa") == 100.0);
    CHECK(c.get_int_list("model", "dims") == std::vector<int>{3, 4, 5});

    CHECK(c.section_names() == std::vector<std::string>{"experiment", "model"});
    CHECK(c.keys("model") == std::vector<std::string>{"N", "dims", "kappa"});
}

TEST_CASE("config: fallbacks apply only when the key is absent", "[config]") {
    const Config c = Config::parse_string("[a]\nx = 2\n");
    CHECK(c.get_int("a", "x", 7) == 2);
    CHECK(c.get_int("a", "y", 7) == 7);
    CHECK(c.get_double("a", "y", 0.5) == 0.5);
    CHECK(c.get_string("b", "z", "dflt") == "dflt");
}

TEST_CASE("config: parse errors carry origin and line number", "[config]") {
    CHECK_THROWS_MATCHES(Config::parse_string("[a\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("f.ini:1") &&
                                        ContainsSubstring("malformed section header")));
    CHECK_THROWS_MATCHES(Config::parse_string("[]\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("empty section name")));
    CHECK_THROWS_MATCHES(Config::parse_string("[a]\n[a]\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("f.ini:2") &&
                                        ContainsSubstring("duplicate section")));
    CHECK_THROWS_MATCHES(Config::parse_string("x = 1\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("outside of any [section]")));
    CHECK_THROWS_MATCHES(Config::parse_string("[a]\njust words\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("f.ini:2") &&
                                        ContainsSubstring("expected 'key = value'")));
    CHECK_THROWS_MATCHES(Config::parse_string("[a]\n= 3\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("empty key")));
    CHECK_THROWS_MATCHES(Config::parse_string("[a]\nx = 1\nx = 2\n", "f.ini"), ConfigError,
                         MessageMatches(ContainsSubstring("f.ini:3") &&
                                        ContainsSubstring("duplicate key 'x'")));
}

TEST_CASE("config: typed accessors reject malformed values with location", "[config]") {
    const Config c = Config::parse_string("[a]\nx = fast\ny = 1.5z\nn = 2.5\nl = 1,,2\n", "t.ini");
    CHECK_THROWS_MATCHES(c.get_double("a", "x"), ConfigError,
                         MessageMatches(ContainsSubstring("t.ini:2 ([a] x)") &&
                                        ContainsSubstring("expected a number")));
    CHECK_THROWS_MATCHES(c.get_double("a", "y"), ConfigError,
                         MessageMatches(ContainsSubstring("expected a number")));
    CHECK_THROWS_MATCHES(c.get_int("a", "n"), ConfigError,
                         MessageMatches(ContainsSubstring("expected an integer")));
    CHECK_THROWS_MATCHES(c.get_list("a", "l"), ConfigError,
                         MessageMatches(ContainsSubstring("empty list element")));
    CHECK_THROWS_MATCHES(c.get_int_list("a", "x"), ConfigError,
                         MessageMatches(ContainsSubstring("expected integers")));
    CHECK_THROWS_MATCHES(c.get_string("a", "zz"), ConfigError,
                         MessageMatches(ContainsSubstring("missing key 'zz'")));
    CHECK_THROWS_MATCHES(c.get_string("nope", "zz"), ConfigError,
                         MessageMatches(ContainsSubstring("missing section [nope]")));
}

TEST_CASE("config: schema enforcement rejects unknown sections and keys", "[config]") {
    const std::map<std::string, std::vector<std::string>> schema = {
        {"a", {"x", "y"}},
        {"b", {"z"}},
    };
    Config::parse_string("[a]\nx = 1\ny = 2\n[b]\nz = 3\n").enforce_schema(schema);

    CHECK_THROWS_MATCHES(Config::parse_string("[c]\nq = 1\n", "s.ini").enforce_schema(schema),
                         ConfigError, MessageMatches(ContainsSubstring("unknown section [c]")));
    CHECK_THROWS_MATCHES(Config::parse_string("[a]\nx = 1\nw = 2\n", "s.ini").enforce_schema(schema),
                         ConfigError,
                         MessageMatches(ContainsSubstring("s.ini:3") &&
                                        ContainsSubstring("unknown key 'w' in [a]")));
}

TEST_CASE("config: parse_file round-trips and reports unreadable paths", "[config]") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "dwell_config_test.ini";
    {
        std::ofstream out(path);
        out << "[a]\nx = 42\n";
    }
    const Config c = Config::parse_file(path.string());
    CHECK(c.origin() == path.string());
    CHECK(c.get_int("a", "x") == 42);
    fs::remove(path);

    CHECK_THROWS_MATCHES(Config::parse_file((path / "missing").string()), IoError,
                         MessageMatches(ContainsSubstring("cannot open config file")));
}
