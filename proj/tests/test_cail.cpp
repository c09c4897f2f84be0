#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "ces/cail.hpp"

using namespace ces;
using namespace ces::cail;

namespace {

const Scmt& scmt() {
    static const Scmt table = Scmt::load(CES_DATA_DIR "/scmt.tsv");
    return table;
}

std::vector<Cell> cells_of(std::string_view src) { return graph_array_of(src, scmt(), "t").cells; }

const Edge* find_edge(const IndependencyGraph& g, NodeKind from, NodeKind to, bool back = false) {
    for (const auto& e : g.edges)
        if (g.nodes[e.from].kind == from && g.nodes[e.to].kind == to && e.back_edge == back) return &e;
    return nullptr;
}

}  // namespace

TEST(Scmt, BundledTableHasAllGroups) {
    EXPECT_EQ(scmt().size(), 30u);
    EXPECT_EQ(scmt().groups(), (std::set<char>{'F', 'M', 'R'}));
    EXPECT_TRUE(scmt().contains("M(19)"));
    EXPECT_THROW(scmt().describe("M(20)"), UnknownSymbol);
}

TEST(Scmt, RejectsMalformedIds) {
    EXPECT_FALSE(is_symbol_id("M(0)"));
    EXPECT_FALSE(is_symbol_id("m(1)"));
    EXPECT_FALSE(is_symbol_id("M1"));
    EXPECT_TRUE(is_symbol_id("R(12)"));
    EXPECT_THROW(Scmt::parse("M1\tbad\n"), DataError);
    EXPECT_THROW(Scmt::parse("M(1)\ta\nM(1)\tb\n"), DataError);
}

TEST(Parse, KmeansTokens) {
    const auto s = parse_cail("Begin R(1) While F(1) M(1) End End", scmt());
    const std::vector<Token> want{{TokenKind::Begin, {}}, symbol_token("R(1)"), {TokenKind::While, {}}, symbol_token("F(1)"),
                                  symbol_token("M(1)"),  {TokenKind::End, {}},  {TokenKind::End, {}}};
    EXPECT_EQ(s.tokens, want);
}

TEST(Parse, EmptyBodyIsLegal) {
    const auto s = parse_cail("Begin End", scmt());
    ASSERT_EQ(s.tokens.size(), 2u);
    EXPECT_EQ(s.tokens[0].kind, TokenKind::Begin);
    EXPECT_EQ(s.tokens[1].kind, TokenKind::End);
}

TEST(Parse, KeywordsCaseInsensitiveAndCommentsSkipped) {
    const auto a = parse_cail("begin R(1) WHILE F(1) M(1) end END", scmt());
    const auto b = parse_cail("# k-means\nBegin R(1)   # seed\n While F(1)\n  M(1)\n End\nEnd\n", scmt());
    EXPECT_EQ(a.tokens, b.tokens);
}

TEST(Parse, StructureErrors) {
    EXPECT_THROW(parse_cail("Begin If M(1) End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("R(1) Begin End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("Begin End End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("Begin Else End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("Begin Break End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("Begin While Break M(1) End End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("Begin If M(1) Else M(2) Else M(3) End End", scmt()), StructureError);
    EXPECT_THROW(parse_cail("", scmt()), StructureError);
}

TEST(Parse, StructureErrorReportsPosition) {
    try {
        parse_cail("Begin M(1) Else End", scmt());
        FAIL();
    } catch (const StructureError& e) {
        EXPECT_EQ(e.position(), 2u);
    }
}

TEST(Parse, UnknownSymbol) {
    EXPECT_THROW(parse_cail("Begin Q(7) End", scmt()), UnknownSymbol);
    EXPECT_THROW(parse_cail("Begin M(99) End", scmt()), UnknownSymbol);
    EXPECT_THROW(parse_cail("Begin Frobnicate End", scmt()), DataError);
}

TEST(Graph, KmeansEdges) {
    const auto g = build_graph(parse_cail("Begin R(1) While F(1) M(1) End End", scmt()));
    const auto* in = find_edge(g, NodeKind::Entry, NodeKind::LoopHeader);
    const auto* back = find_edge(g, NodeKind::LoopHeader, NodeKind::LoopHeader, true);
    const auto* out = find_edge(g, NodeKind::LoopHeader, NodeKind::Exit);
    ASSERT_TRUE(in && back && out);
    EXPECT_EQ(in->symbols, (Cell{"R(1)"}));
    EXPECT_EQ(back->symbols, (Cell{"F(1)", "M(1)"}));
    EXPECT_TRUE(out->symbols.empty());
    EXPECT_EQ(g.edges.size(), 3u);
}

TEST(Graph, EmptyBodyHasOneEdge) {
    const auto g = build_graph(parse_cail("Begin End", scmt()));
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].from, g.entry);
    EXPECT_EQ(g.edges[0].to, g.exit);
    EXPECT_TRUE(g.edges[0].symbols.empty());
    EXPECT_THROW(to_graph_array(g), EmptyGraph);
}

TEST(Graph, IfElseShape) {
    const auto g = build_graph(parse_cail("Begin M(1) If M(2) Else M(3) End End", scmt()));
    ASSERT_EQ(g.edges.size(), 4u);
    const auto* in = find_edge(g, NodeKind::Entry, NodeKind::Branch);
    const auto* out = find_edge(g, NodeKind::Join, NodeKind::Exit);
    ASSERT_TRUE(in && out);
    EXPECT_EQ(in->symbols, (Cell{"M(1)"}));
    EXPECT_TRUE(out->symbols.empty());
    std::vector<Cell> branches;
    for (const auto& e : g.edges)
        if (g.nodes[e.from].kind == NodeKind::Branch && g.nodes[e.to].kind == NodeKind::Join) branches.push_back(e.symbols);
    EXPECT_EQ(branches, (std::vector<Cell>{{"M(2)"}, {"M(3)"}}));
}

TEST(Graph, SymbolsAfterLoopRideTheExitEdge) {
    EXPECT_EQ(cells_of("Begin R(1) While F(1) End M(4) End"), (std::vector<Cell>{{"R(1)"}, {"F(1)"}, {"M(4)"}}));
}

TEST(Graph, BreakTargetsLoopExit) {
    const auto g = build_graph(parse_cail("Begin While M(1) If M(2) Break End M(3) End M(4) End", scmt()));
    const Edge* loop_exit = nullptr;
    for (const auto& e : g.edges)
        if (g.nodes[e.from].kind == NodeKind::LoopHeader && e.symbols == Cell{"M(4)"}) loop_exit = &e;
    ASSERT_TRUE(loop_exit);
    std::size_t break_edges = 0;
    for (const auto& e : g.edges)
        if (e.symbols == Cell{"M(2)"}) {
            ++break_edges;
            EXPECT_EQ(e.to, loop_exit->to);
        }
    EXPECT_EQ(break_edges, 1u);
    EXPECT_EQ(cells_of("Begin While M(1) If M(2) Break End M(3) End M(4) End"),
              (std::vector<Cell>{{"M(1)"}, {"M(2)"}, {"M(3)"}, {"M(4)"}}));
}

TEST(GraphArray, PaperScripts) {
    const auto k = load_cail(CES_DATA_DIR "/cail/K.cail", scmt());
    const auto f = load_cail(CES_DATA_DIR "/cail/F.cail", scmt());
    EXPECT_EQ(k.name, "K");
    EXPECT_EQ(to_graph_array(build_graph(k)).cells, (std::vector<Cell>{{"R(1)"}, {"F(1)", "M(1)"}}));
    EXPECT_EQ(to_graph_array(build_graph(f)).cells, (std::vector<Cell>{{"R(1)"}, {"M(2)", "M(3)"}}));
}

TEST(GraphArray, EveryBundledScriptBuilds) {
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(CES_DATA_DIR "/cail")) {
        const auto script = load_cail(entry.path(), scmt());
        EXPECT_FALSE(to_graph_array(build_graph(script)).cells.empty()) << script.name;
        ++count;
    }
    EXPECT_EQ(count, 15u);
}

TEST(Dot, Exports) {
    const auto k = export_dot(build_graph(parse_cail("Begin R(1) While F(1) M(1) End End", scmt(), "K")));
    EXPECT_NE(k.find("digraph \"K\""), std::string::npos);
    EXPECT_NE(k.find("entry -> n1 [label=\"R(1)\"]"), std::string::npos);
    const auto f = export_dot(build_graph(load_cail(CES_DATA_DIR "/cail/F.cail", scmt())));
    EXPECT_NE(f.find("label=\"M(2), M(3)\""), std::string::npos);
    const auto empty = export_dot(build_graph(parse_cail("Begin End", scmt())));
    EXPECT_NE(empty.find("entry -> exit;"), std::string::npos);
    EXPECT_EQ(empty.find("label="), std::string::npos);
}

// ---------------------------------------------------------------------------
// Randomized structural properties

namespace {

struct ScriptGen {
    std::mt19937_64 rng;
    std::vector<std::string> pool{"R(1)", "R(2)", "M(1)", "M(2)", "M(3)", "F(1)", "F(2)", "F(3)"};

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

    // Returns true when the block always leaves through Break.
    bool block(std::string& out, int depth, bool in_loop) {
        const std::size_t statements = pick(4);
        for (std::size_t s = 0; s < statements; ++s) {
            const auto kind = depth > 0 ? pick(in_loop ? 5 : 4) : 0;
            if (kind <= 1) {
                for (std::size_t i = 0, m = 1 + pick(3); i < m; ++i) out += pool[pick(pool.size())] + " ";
            } else if (kind == 2) {
                out += "If ";
                const bool a = block(out, depth - 1, in_loop);
                bool b = false;
                if (pick(2)) {
                    out += "Else ";
                    b = block(out, depth - 1, in_loop);
                }
                out += "End ";
                if (a && b) return true;
            } else if (kind == 3) {
                out += "While ";
                block(out, depth - 1, true);
                out += "End ";
            } else {
                out += "Break ";
                return true;
            }
        }
        return false;
    }

    std::string script() {
        std::string s = "Begin ";
        block(s, 3, false);
        return s + "End";
    }
};

std::map<std::string, int> symbol_counts(const CailScript& s) {
    std::map<std::string, int> m;
    for (const auto& t : s.tokens)
        if (t.kind == TokenKind::Symbol) ++m[t.symbol];
    return m;
}

}  // namespace

TEST(Property, EverySymbolLandsInExactlyOneCell) {
    ScriptGen gen{std::mt19937_64(11)};
    for (int trial = 0; trial < 500; ++trial) {
        const auto src = gen.script();
        const auto script = parse_cail(src, scmt());
        const auto g = build_graph(script);
        std::map<std::string, int> in_cells;
        std::size_t labeled = 0;
        for (const auto& e : g.edges) {
            labeled += !e.symbols.empty();
            for (const auto& s : e.symbols) ++in_cells[s];
        }
        EXPECT_EQ(in_cells, symbol_counts(script)) << src;
        EXPECT_LE(labeled, g.edges.size());
        if (labeled > 0) {
            const auto a1 = to_graph_array(g);
            const auto a2 = to_graph_array(build_graph(parse_cail(src, scmt())));
            EXPECT_EQ(a1.cells, a2.cells) << src;
        }
    }
}

TEST(Property, GraphShapeInvariants) {
    ScriptGen gen{std::mt19937_64(12)};
    for (int trial = 0; trial < 500; ++trial) {
        const auto src = gen.script();
        const auto script = parse_cail(src, scmt());
        const auto g = build_graph(script);
        std::size_t entries = 0, exits = 0;
        for (const auto& n : g.nodes) {
            entries += n.kind == NodeKind::Entry;
            exits += n.kind == NodeKind::Exit;
        }
        EXPECT_EQ(entries, 1u);
        EXPECT_EQ(exits, 1u);
        for (const auto& e : g.edges) {
            EXPECT_NE(e.to, g.entry) << src;
            EXPECT_NE(e.from, g.exit) << src;
        }
        // Each loop header receives at most one back edge (none when the body always breaks).
        std::map<std::size_t, int> back;
        for (const auto& e : g.edges)
            if (e.back_edge) {
                EXPECT_EQ(g.nodes[e.to].kind, NodeKind::LoopHeader);
                ++back[e.to];
            }
        for (const auto& [node, count] : back) EXPECT_EQ(count, 1) << src;
    }
}

TEST(Property, SwappingIfBranchesKeepsCellMultiset) {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"Begin M(1) If M(2) F(1) Else M(3) End R(1) End", "Begin M(1) If M(3) Else M(2) F(1) End R(1) End"},
        {"Begin While F(1) If M(1) Else M(2) M(3) End End End", "Begin While F(1) If M(2) M(3) Else M(1) End End End"},
        {"Begin If R(1) If M(1) Else M(2) End Else F(2) End End", "Begin If F(2) Else R(1) If M(1) Else M(2) End End End"},
    };
    for (const auto& [a, b] : cases) {
        auto ca = cells_of(a), cb = cells_of(b);
        std::sort(ca.begin(), ca.end());
        std::sort(cb.begin(), cb.end());
        EXPECT_EQ(ca, cb) << a;
    }
}
