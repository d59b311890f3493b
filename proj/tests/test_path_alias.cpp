#include <gtest/gtest.h>

#include "drift/alias.hpp"
#include "drift/path.hpp"
#include "fixture_repo.hpp"
#include "support.hpp"

using namespace drift;
using drift::testing::A;
using drift::testing::P;

TEST(NormalizePath, StripsPrefixesAndCollapsesSlashes) {
    EXPECT_EQ(normalize_path("./src/flask/app.py")->str(), "src/flask/app.py");
    EXPECT_EQ(normalize_path("/src//flask/./app.py")->str(), "src/flask/app.py");
    EXPECT_EQ(normalize_path("src\\flask\\app.py")->str(), "src/flask/app.py");
    EXPECT_EQ(normalize_path("dir/")->str(), "dir");
}

TEST(NormalizePath, RejectsParentSegmentsAndEmptyResults) {
    EXPECT_FALSE(normalize_path("../etc/passwd"));
    EXPECT_FALSE(normalize_path("a/../b"));
    EXPECT_FALSE(normalize_path(""));
    EXPECT_FALSE(normalize_path("./"));
    EXPECT_FALSE(normalize_path("/"));
}

TEST(NormalizePath, IsCaseSensitive) { EXPECT_NE(P("Flask/App.py"), P("flask/app.py")); }

TEST(NormalizePath, IdempotentOnRandomStrings) {
    drift::testing::Gen g(11);
    const std::string alphabet = "ab./\\_-x";
    for (int i = 0; i < 200; ++i) {
        std::string raw;
        for (std::size_t n = g.between(0, 14); n > 0; --n)
            raw += alphabet[g.below(alphabet.size())];
        auto once = normalize_path(raw);
        if (!once)
            continue;
        auto twice = normalize_path(once->str());
        ASSERT_TRUE(twice) << raw;
        EXPECT_EQ(*once, *twice) << raw;
        EXPECT_NE(once->str().front(), '/');
        EXPECT_NE(once->str().back(), '/');
        EXPECT_EQ(once->str().find("//"), std::string::npos);
    }
}

TEST(GitQuoting, UnquotesCStyleEscapes) {
    EXPECT_EQ(*unquote_git_path("plain/path.py"), "plain/path.py");
    EXPECT_EQ(*unquote_git_path("\"with\\ttab.py\""), "with\ttab.py");
    EXPECT_EQ(*unquote_git_path("\"caf\\303\\251.py\""), "caf\xc3\xa9.py");
    EXPECT_EQ(*unquote_git_path("\"quote\\\"d.py\""), "quote\"d.py");
    EXPECT_FALSE(unquote_git_path("\"unterminated"));
    EXPECT_FALSE(unquote_git_path("\"bad\\q\""));
}

TEST(Utf8, RejectsMalformedSequences) {
    EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9"));
    EXPECT_FALSE(is_valid_utf8("\xc3"));
    EXPECT_FALSE(is_valid_utf8("\xc0\xaf"));         // overlong
    EXPECT_FALSE(is_valid_utf8("\xed\xa0\x80"));     // surrogate
    EXPECT_FALSE(is_valid_utf8("\xff"));
}

TEST(AliasMap, RejectsSelfMapsAndUncollapsedChains) {
    EXPECT_THROW(A({{P("a.py"), P("a.py")}}), Error);
    EXPECT_THROW(A({{P("a.py"), P("b.py")}, {P("b.py"), P("c.py")}}), Error);
    EXPECT_NO_THROW(A({{P("a.py"), P("c.py")}, {P("b.py"), P("c.py")}}));
}

TEST(AliasMap, JsonUsesTheDeletedSentinel) {
    auto m = A({{P("flask/app.py"), P("src/flask/app.py")}, {P("flask/__init__.py"), std::nullopt}});
    auto j = m.to_json();
    EXPECT_EQ(j.dump(), R"({"flask/__init__.py":"__DELETED__","flask/app.py":"src/flask/app.py"})");
    EXPECT_EQ(AliasMap::from_json(j), m);
    EXPECT_EQ(m.deleted_set(), drift::testing::Ps({"flask/__init__.py"}));
}

TEST(BuildAliasMap, DeletesAndRenamesOnly) {
    auto m = build_alias_map({ChangeEntry::deleted(P("flask/__init__.py"))});
    EXPECT_EQ(m.to_json().dump(), R"({"flask/__init__.py":"__DELETED__"})");
    EXPECT_TRUE(build_alias_map({ChangeEntry::modified(P("a.py")), ChangeEntry::added(P("n.py"))}).empty());
}

TEST(BuildAliasMap, ManyToOneAllowedOneToManyRejected) {
    auto m = build_alias_map({ChangeEntry::renamed(P("a.py"), P("b.py"), 90), ChangeEntry::renamed(P("c.py"), P("b.py"), 80)});
    EXPECT_EQ(m.size(), 2u);
    EXPECT_EQ(m.resolve(P("c.py")), Resolution::renamed(P("b.py")));
    EXPECT_THROW(build_alias_map({ChangeEntry::renamed(P("a.py"), P("b.py"), 90), ChangeEntry::renamed(P("a.py"), P("c.py"), 90)}), Error);
    EXPECT_THROW(build_alias_map({ChangeEntry::renamed(P("a.py"), P("b.py"), 90), ChangeEntry::deleted(P("a.py"))}), Error);
}

TEST(Resolve, KeptRenamedDeleted) {
    auto m = A({{P("flask/app.py"), P("src/flask/app.py")}, {P("flask/__init__.py"), std::nullopt}});
    EXPECT_EQ(resolve(m, P("flask/app.py")), Resolution::renamed(P("src/flask/app.py")));
    EXPECT_EQ(resolve(m, P("flask/__init__.py")), Resolution::deleted());
    EXPECT_EQ(resolve(m, P("README.md")), Resolution::kept(P("README.md")));
}

TEST(Resolve, NeverKeptForAKeyOfARandomMap) {
    drift::testing::Gen g(5);
    for (int i = 0; i < 200; ++i) {
        auto inst = drift::testing::random_instance(g);
        for (const auto& [k, _] : inst.alias.entries()) {
            EXPECT_NE(inst.alias.resolve(k).kind, Resolution::Kind::Kept);
            EXPECT_EQ(inst.alias.resolve(k), inst.alias.resolve(k));
        }
    }
}

TEST(Compose, ChainCollapses) {
    auto c = compose(A({{P("a"), P("b")}}), A({{P("b"), P("c")}}));
    EXPECT_EQ(c, A({{P("a"), P("c")}, {P("b"), P("c")}}));
}

TEST(Compose, DeleteDominates) {
    auto c = compose(A({{P("a"), P("b")}}), A({{P("b"), std::nullopt}}));
    EXPECT_EQ(c, A({{P("a"), std::nullopt}, {P("b"), std::nullopt}}));
    auto d = compose(A({{P("a"), std::nullopt}}), A({{P("x"), P("y")}}));
    EXPECT_TRUE(d.is_deleted(P("a")));
}

TEST(Compose, EmptyIsIdentity) {
    auto m = A({{P("a"), P("b")}, {P("c"), std::nullopt}});
    EXPECT_EQ(compose(AliasMap(), m), m);
    EXPECT_EQ(compose(m, AliasMap()), m);
}

TEST(Compose, RenameBackDropsTheSelfMap) {
    auto c = compose(A({{P("a"), P("b")}}), A({{P("b"), P("a")}}));
    EXPECT_FALSE(c.contains(P("a")));
    EXPECT_EQ(c.resolve(P("b")), Resolution::renamed(P("a")));
}

TEST(Compose, ReusedPathIsLiveAtTheEnd) {
    // a deleted in the first window, then something renamed onto a in the second.
    auto c = compose(A({{P("a"), std::nullopt}}), A({{P("z"), P("a")}}));
    EXPECT_FALSE(c.contains(P("a")));
    EXPECT_EQ(c.resolve(P("z")), Resolution::renamed(P("a")));
}

TEST(Compose, AgreesWithFunctionCompositionOnFreshNameHistories) {
    drift::testing::Gen g(99);
    for (int trial = 0; trial < 200; ++trial) {
        drift::testing::HistorySim sim(g);
        AliasMap a = sim.step();
        AliasMap b = sim.step();
        AliasMap ab = compose(a, b);
        for (const auto& p : sim.ever()) {
            auto expect = drift::testing::apply_total(b, drift::testing::apply_total(a, p));
            EXPECT_EQ(drift::testing::apply_total(ab, p), expect) << p;
        }
    }
}

TEST(Compose, AssociativeCollapsedAndDeleteDominant) {
    drift::testing::Gen g(2024);
    for (int trial = 0; trial < 500; ++trial) {
        drift::testing::HistorySim sim(g);
        AliasMap a = sim.step();
        AliasMap b = sim.step();
        AliasMap c = sim.step();
        AliasMap ab = compose(a, b);
        ASSERT_EQ(compose(ab, c), compose(a, compose(b, c)));
        for (const auto& [key, target] : ab.entries()) {
            if (target)
                EXPECT_FALSE(ab.contains(*target)) << "uncollapsed chain through " << *target;
        }
        for (const auto& [key, target] : a.entries()) {
            if (!target || b.is_deleted(*target))
                EXPECT_TRUE(ab.is_deleted(key)) << key;
        }
    }
}

TEST(SnapshotIndex, ListingAndTree) {
    auto s = SnapshotIndex::from_listing("src/a.py\n\n./b/c.py\n");
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.contains(P("b/c.py")));
    EXPECT_EQ(s.to_listing(), "b/c.py\nsrc/a.py\n");
    EXPECT_THROW(SnapshotIndex::from_listing("ok.py\n../bad.py\n"), ParseError);

    drift::testing::TempDir dir;
    drift::testing::put(dir.path(), "x/y.py", "1");
    drift::testing::put(dir.path(), ".git/HEAD", "ref");
    drift::testing::put(dir.path(), "top.txt", "2");
    auto t = SnapshotIndex::load(dir.path());
    EXPECT_EQ(t.paths(), drift::testing::Ps({"x/y.py", "top.txt"}));
}
