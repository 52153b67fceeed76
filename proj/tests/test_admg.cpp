#include "admgaug/admg.hpp"
#include "admgaug/error.hpp"

#include "support/instances.hpp"

#include <doctest.h>

#include <functional>
#include <random>

using namespace admgaug;
using Positions = std::vector<std::size_t>;

namespace {
Admg numbered(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= d; ++i) names.push_back(std::to_string(i));
    return Admg(names);
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an admgaug::Error");
    return Errc::IoError;
}
}  // namespace

TEST_CASE("validate: topological order with declaration-order ties") {
    SUBCASE("chain is already ordered") {
        auto g = numbered(3);
        g.add_directed("1", "2");
        g.add_directed("2", "3");
        CHECK(validate(g).order == Positions{0, 1, 2});
    }
    SUBCASE("ancestor pulled ahead of its child") {
        auto g = numbered(3);
        g.add_directed("3", "1");
        const auto idx = validate(g);
        CHECK(idx.order == Positions{2, 0, 1});
        CHECK(idx.position == Positions{1, 2, 0});
    }
    SUBCASE("two-cycle") {
        auto g = numbered(2);
        g.add_directed("1", "2");
        g.add_directed("2", "1");
        CHECK(code_of([&] { validate(g); }) == Errc::CyclicGraph);
    }
    SUBCASE("bidirected edges do not constrain the order") {
        auto g = numbered(2);
        g.add_bidirected("2", "1");
        CHECK(validate(g).order == Positions{0, 1});
    }
}

TEST_CASE("edge insertion errors") {
    auto g = numbered(3);
    CHECK(code_of([&] { g.add_directed("1", "1"); }) == Errc::SelfLoop);
    CHECK(code_of([&] { g.add_bidirected("2", "2"); }) == Errc::SelfLoop);
    CHECK(code_of([&] { g.add_directed("1", "9"); }) == Errc::UnknownVertex);
    CHECK(code_of([&] { g.add_directed(std::size_t{0}, std::size_t{7}); }) == Errc::UnknownVertex);
    g.add_directed("1", "2");
    g.add_directed("1", "2");
    g.add_bidirected("1", "2");
    g.add_bidirected("2", "1");
    CHECK(g.directed_edges().size() == 1);
    CHECK(g.bidirected_edges().size() == 1);
    CHECK(code_of([] { Admg({"a", "a"}); }) == Errc::InvalidArgument);
}

TEST_CASE("district") {
    SUBCASE("no bidirected edges gives a singleton") {
        auto g = numbered(3);
        g.add_directed("1", "3");
        const auto idx = validate(g);
        for (std::size_t v = 0; v < 3; ++v) CHECK(district(g, idx, v) == Positions{v});
    }
    SUBCASE("one bidirected edge") {
        auto g = numbered(3);
        g.add_bidirected("2", "3");
        CHECK(district(g, validate(g), 2) == Positions{1, 2});
    }
    SUBCASE("bidirected path inside the prefix") {
        auto g = numbered(4);
        g.add_bidirected("1", "2");
        g.add_bidirected("2", "4");
        const auto idx = validate(g);
        CHECK(district(g, idx, 3) == Positions{0, 1, 3});
        // the prefix ending at 2 cannot reach 4
        CHECK(district(g, idx, 1) == Positions{0, 1});
    }
    SUBCASE("paths through later vertices are cut") {
        auto g = numbered(3);
        g.add_bidirected("1", "3");
        g.add_bidirected("2", "3");
        CHECK(district(g, validate(g), 1) == Positions{1});
    }
}

TEST_CASE("markov pillow examples") {
    SUBCASE("DAG chain: pillows are parents") {
        auto g = numbered(3);
        g.add_directed("1", "2");
        g.add_directed("2", "3");
        const auto mp = markov_pillow(g, validate(g));
        CHECK(mp[0].empty());
        CHECK(mp[1] == Positions{0});
        CHECK(mp[2] == Positions{1});
    }
    SUBCASE("edgeless graph") {
        const auto g = numbered(4);
        const auto mp = markov_pillow(g, validate(g));
        for (std::size_t j = 0; j < 4; ++j) CHECK(mp[j].empty());
    }
    SUBCASE("district parents enter the pillow") {
        auto g = numbered(3);
        g.add_directed("1", "2");
        g.add_bidirected("2", "3");
        const auto mp = markov_pillow(g, validate(g));
        CHECK(mp[2] == Positions{0, 1});
        CHECK(mp[1] == Positions{0});
    }
    SUBCASE("complete bidirected graph gives the chain rule") {
        auto g = numbered(4);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b) g.add_bidirected(a, b);
        const auto mp = markov_pillow(g, validate(g));
        for (std::size_t j = 0; j < 4; ++j) {
            Positions expect(j);
            std::iota(expect.begin(), expect.end(), std::size_t{0});
            CHECK(mp[j] == expect);
        }
    }
}

TEST_CASE("is_uninformative") {
    auto g = numbered(3);
    g.add_bidirected("1", "2");
    g.add_bidirected("1", "3");
    CHECK_FALSE(is_uninformative(g));
    g.add_bidirected("2", "3");
    CHECK(is_uninformative(g));

    auto chain = numbered(3);
    chain.add_directed("1", "2");
    chain.add_directed("2", "3");
    CHECK_FALSE(is_uninformative(chain));
    CHECK(is_uninformative(numbered(1)));
    CHECK_FALSE(is_uninformative(numbered(2)));
}

TEST_CASE("property: pillows precede their vertex, DAG pillows are parents, validate is deterministic") {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<std::size_t> size(1, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto d = size(rng);
        const auto g = testing::random_admg(rng, d, 0.4, trial % 2 ? 0.3 : 0.0);
        const auto idx = validate(g);
        CHECK(validate(g) == idx);
        for (const auto& [a, b] : g.directed_edges()) CHECK(idx.position[a] < idx.position[b]);
        const auto mp = markov_pillow(g, idx);
        const auto pa = parent_positions(g, idx);
        for (std::size_t j = 0; j < d; ++j) {
            for (auto p : mp[j]) CHECK(p < j);
            CHECK(std::is_sorted(mp[j].begin(), mp[j].end()));
            if (g.bidirected_edges().empty()) CHECK(mp[j] == pa[j]);
        }
    }
}

TEST_CASE("property: district contains v and grows with bidirected edges") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t d = 2 + trial % 7;
        auto g = testing::random_admg(rng, d, 0.3, 0.2);
        const auto idx = validate(g);
        std::uniform_int_distribution<std::size_t> pick(0, d - 1);
        const auto v = pick(rng);
        const auto before = district(g, idx, v);
        CHECK(std::binary_search(before.begin(), before.end(), v));
        const auto a = pick(rng);
        const auto b = pick(rng);
        if (a == b || idx.position[a] > v || idx.position[b] > v) continue;
        g.add_bidirected(a, b);
        const auto after = district(g, idx, v);
        CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
    }
}

TEST_CASE("graph text format") {
    SUBCASE("round trip of a mixed graph with comments and discrete line") {
        const auto spec = parse_graph(
            "# trivariate\n"
            "vertices: Y, X1 , X2\n"
            "discrete: Y\n"
            "\n"
            "Y -> X1   # first child\n"
            "Y->X2\n"
            "X1 <-> X2\n");
        CHECK(spec.graph.vertices() == std::vector<std::string>{"Y", "X1", "X2"});
        CHECK(spec.discrete == std::vector<std::string>{"Y"});
        CHECK(spec.graph.directed_edges().size() == 2);
        CHECK(spec.graph.has_bidirected(1, 2));
        const auto again = parse_graph(format_graph(spec.graph, spec.discrete));
        CHECK(again.graph.directed_edges() == spec.graph.directed_edges());
        CHECK(again.graph.bidirected_edges() == spec.graph.bidirected_edges());
    }
    SUBCASE("malformed edge reports its line") {
        try {
            parse_graph("vertices: a, b\na -> b\na => b\n", "g.txt");
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::ParseError);
            CHECK(std::string(e.what()).find("g.txt:3") != std::string::npos);
        }
    }
    SUBCASE("undeclared vertex keeps its error class and gains a location") {
        try {
            parse_graph("vertices: a, b\nb -> c\n", "g.txt");
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::UnknownVertex);
            CHECK(std::string(e.what()).find("g.txt:2") != std::string::npos);
        }
    }
    SUBCASE("missing header") {
        CHECK(code_of([] { parse_graph("a -> b\n"); }) == Errc::ParseError);
        CHECK(code_of([] { parse_graph(""); }) == Errc::ParseError);
    }
    SUBCASE("self-loop") { CHECK(code_of([] { parse_graph("vertices: a\na <-> a\n"); }) == Errc::SelfLoop); }
}
