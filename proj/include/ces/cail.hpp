#pragma once

// CAIL: a small language that reduces a clustering algorithm to the shape of its
// control flow plus the standard symbols it invokes. Scripts are parsed against a
// symbol table (SCMT), turned into an independency graph whose edges carry the
// symbols executed between two control conjunctions, and flattened into the
// ordered cell array that algorithm comparison works on.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ces/error.hpp"
#include "ces/io.hpp"

namespace ces::cail {

/// True when `id` looks like `X(n)`: one uppercase group letter and a positive integer.
inline bool is_symbol_id(std::string_view id) {
    if (id.size() < 4 || !std::isupper(static_cast<unsigned char>(id[0])) || id[1] != '(' || id.back() != ')') return false;
    const auto digits = id.substr(2, id.size() - 3);
    if (digits.empty() || digits[0] == '0') return false;
    return std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

/// Standard code mapping table.
class Scmt {
public:
    Scmt() = default;

    void add(const std::string& id, std::string description) {
        if (!is_symbol_id(id)) throw DataError("invalid symbol id '" + id + "'");
        if (entries_.count(id) != 0) throw DataError("duplicate symbol id '" + id + "'");
        entries_.emplace(id, std::move(description));
        groups_.insert(id[0]);
    }

    bool contains(const std::string& id) const { return entries_.count(id) != 0; }
    const std::string& describe(const std::string& id) const {
        const auto it = entries_.find(id);
        if (it == entries_.end()) throw UnknownSymbol(id);
        return it->second;
    }

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    const std::set<char>& groups() const noexcept { return groups_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Tab-separated `symbol<TAB>description` lines; blank lines and `#` lines are skipped.
    static Scmt parse(std::string_view text) {
        Scmt table;
        std::size_t row = 0;
        for (const auto raw : io::lines(text)) {
            ++row;
            const auto line = io::trim(raw);
            if (line.empty() || line.front() == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string_view::npos) throw ParseError(row, 1, "expected '<symbol>\\t<description>'");
            const std::string id(io::trim(line.substr(0, tab)));
            if (!is_symbol_id(id)) throw ParseError(row, 1, "invalid symbol id '" + id + "'");
            if (table.contains(id)) throw ParseError(row, 1, "duplicate symbol id '" + id + "'");
            table.add(id, std::string(io::trim(line.substr(tab + 1))));
        }
        return table;
    }

    static Scmt load(const std::filesystem::path& path) { return parse(io::read_text_file(path)); }

private:
    std::map<std::string, std::string> entries_;
    std::set<char> groups_;
};

enum class TokenKind { Begin, End, If, Else, While, Break, Symbol };

struct Token {
    TokenKind kind;
    std::string symbol;  // set for TokenKind::Symbol only

    bool operator==(const Token&) const = default;
};

inline Token symbol_token(std::string id) { return {TokenKind::Symbol, std::move(id)}; }

inline std::string to_string(const Token& t) {
    switch (t.kind) {
        case TokenKind::Begin: return "Begin";
        case TokenKind::End: return "End";
        case TokenKind::If: return "If";
        case TokenKind::Else: return "Else";
        case TokenKind::While: return "While";
        case TokenKind::Break: return "Break";
        case TokenKind::Symbol: return t.symbol;
    }
    return {};
}

struct CailScript {
    std::string name;
    std::vector<Token> tokens;
};

namespace detail {

inline std::optional<TokenKind> keyword(std::string_view word) {
    std::string lower(word);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "begin") return TokenKind::Begin;
    if (lower == "end") return TokenKind::End;
    if (lower == "if") return TokenKind::If;
    if (lower == "else") return TokenKind::Else;
    if (lower == "while") return TokenKind::While;
    if (lower == "break") return TokenKind::Break;
    return std::nullopt;
}

// Checks the Begin/End frame, nesting, Else/Break placement and that no token sits
// in code that control flow can never reach (after a Break in the same block, or
// after an If whose branches both break).
inline void check_structure(const std::vector<Token>& tokens) {
    if (tokens.empty()) throw StructureError(0, "script has no tokens");
    if (tokens.front().kind != TokenKind::Begin) throw StructureError(0, "script must start with Begin");

    struct Frame {
        TokenKind kind;
        bool has_else = false;
        bool then_reachable = true;
    };
    std::vector<Frame> stack{{TokenKind::Begin}};
    bool reachable = true;
    std::size_t open_loops = 0;

    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (stack.empty()) throw StructureError(i, "token after the final End");
        const auto kind = tokens[i].kind;
        switch (kind) {
            case TokenKind::Begin:
                throw StructureError(i, "Begin may only open the script");
            case TokenKind::Symbol:
            case TokenKind::If:
            case TokenKind::While:
            case TokenKind::Break:
                if (!reachable) throw StructureError(i, "unreachable '" + to_string(tokens[i]) + "'");
                if (kind == TokenKind::If) stack.push_back({TokenKind::If});
                if (kind == TokenKind::While) {
                    stack.push_back({TokenKind::While});
                    ++open_loops;
                }
                if (kind == TokenKind::Break) {
                    if (open_loops == 0) throw StructureError(i, "Break outside of a While");
                    reachable = false;
                }
                break;
            case TokenKind::Else: {
                auto& top = stack.back();
                if (top.kind != TokenKind::If || top.has_else) throw StructureError(i, "Else without an open If");
                top.has_else = true;
                top.then_reachable = reachable;
                reachable = true;
                break;
            }
            case TokenKind::End: {
                const Frame top = stack.back();
                stack.pop_back();
                if (top.kind == TokenKind::If) {
                    reachable = top.has_else ? (top.then_reachable || reachable) : true;
                } else if (top.kind == TokenKind::While) {
                    --open_loops;
                    reachable = true;
                }
                break;
            }
        }
    }
    if (!stack.empty()) throw StructureError(tokens.size(), "missing End");
}

}  // namespace detail

/// Tokenizes and validates a CAIL script. Keywords are case-insensitive; `#`
/// starts a comment running to the end of the line.
inline CailScript parse_cail(std::string_view source, const Scmt& scmt, std::string name = {}) {
    CailScript script{std::move(name), {}};
    for (const auto line : io::lines(source)) {
        auto code = line.substr(0, line.find('#'));
        std::istringstream words{std::string(code)};
        std::string word;
        while (words >> word) {
            if (const auto kw = detail::keyword(word)) {
                script.tokens.push_back({*kw, {}});
            } else {
                if (!scmt.contains(word)) throw UnknownSymbol(word);
                script.tokens.push_back(symbol_token(word));
            }
        }
    }
    detail::check_structure(script.tokens);
    return script;
}

inline CailScript load_cail(const std::filesystem::path& path, const Scmt& scmt) {
    return parse_cail(io::read_text_file(path), scmt, path.stem().string());
}

// ---------------------------------------------------------------------------
// Independency graph

enum class NodeKind { Entry, Exit, LoopHeader, Branch, Join };

struct Node {
    NodeKind kind;
    std::size_t token;  // index of the token that created the node
};

inline constexpr std::size_t no_token = std::numeric_limits<std::size_t>::max();

struct Edge {
    std::size_t from;
    std::size_t to;
    std::vector<std::string> symbols;
    std::size_t first_symbol_token = no_token;
    bool back_edge = false;
};

struct IndependencyGraph {
    std::string name;
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::size_t entry = 0;
    std::size_t exit = 0;
};

namespace detail {

class GraphBuilder {
public:
    explicit GraphBuilder(const CailScript& script) : script_(script) { graph_.name = script.name; }

    IndependencyGraph build() {
        graph_.entry = add_node(NodeKind::Entry, 0);
        pos_ = 1;
        Position end = block(Position::at(graph_.entry));
        graph_.exit = add_node(NodeKind::Exit, pos_);
        connect(end, graph_.exit);
        return std::move(graph_);
    }

private:
    // Symbols accumulated since leaving `from`; they label the edge that closes it.
    struct Fragment {
        std::size_t from;
        std::vector<std::string> symbols;
        std::size_t first_token = no_token;
    };

    // `live` receives new symbols. `sealed` fragments (pending Break edges) only wait
    // for the next node to be created.
    struct Position {
        std::optional<Fragment> live;
        std::vector<Fragment> sealed;

        static Position at(std::size_t node) { return {Fragment{node, {}, no_token}, {}}; }
        bool dead() const { return !live && sealed.empty(); }
        std::size_t fragment_count() const { return (live ? 1 : 0) + sealed.size(); }
    };

    std::size_t add_node(NodeKind kind, std::size_t token) {
        graph_.nodes.push_back({kind, token});
        return graph_.nodes.size() - 1;
    }

    void add_edge(Fragment f, std::size_t to, bool back) {
        graph_.edges.push_back({f.from, to, std::move(f.symbols), f.first_token, back});
    }

    void connect(Position& p, std::size_t to, bool back = false) {
        if (p.live) add_edge(std::move(*p.live), to, back);
        for (auto& f : p.sealed) add_edge(std::move(f), to, back);
        p = {};
    }

    const Token& current() const { return script_.tokens[pos_]; }

    // Consumes tokens up to (not including) the End or Else closing this block.
    Position block(Position p) {
        while (current().kind != TokenKind::End && current().kind != TokenKind::Else) {
            const auto& tok = current();
            switch (tok.kind) {
                case TokenKind::Symbol:
                    if (p.live->symbols.empty()) p.live->first_token = pos_;
                    p.live->symbols.push_back(tok.symbol);
                    ++pos_;
                    break;
                case TokenKind::If:
                    p = if_block(std::move(p));
                    break;
                case TokenKind::While:
                    p = while_block(std::move(p));
                    break;
                case TokenKind::Break: {
                    auto& breaks = *loops_.back();
                    if (p.live) breaks.push_back(std::move(*p.live));
                    for (auto& f : p.sealed) breaks.push_back(std::move(f));
                    p = {};
                    ++pos_;
                    break;
                }
                default:
                    ++pos_;
                    break;
            }
        }
        return p;
    }

    Position if_block(Position p) {
        const auto branch = add_node(NodeKind::Branch, pos_++);
        connect(p, branch);
        Position then_end = block(Position::at(branch));
        Position else_end = Position::at(branch);
        if (current().kind == TokenKind::Else) {
            ++pos_;
            else_end = block(Position::at(branch));
        }
        const auto end_token = pos_++;
        if (then_end.dead() && else_end.dead()) return {};
        const auto join = add_node(NodeKind::Join, end_token);
        connect(then_end, join);
        connect(else_end, join);
        return Position::at(join);
    }

    Position while_block(Position p) {
        const auto header = add_node(NodeKind::LoopHeader, pos_++);
        connect(p, header);
        std::vector<Fragment> breaks;
        loops_.push_back(&breaks);
        Position body_end = block(Position::at(header));
        loops_.pop_back();
        const auto end_token = pos_++;
        if (body_end.fragment_count() > 1) {
            const auto join = add_node(NodeKind::Join, end_token);
            connect(body_end, join);
            body_end = Position::at(join);
        }
        if (body_end.live) connect(body_end, header, true);
        Position after = Position::at(header);
        after.sealed = std::move(breaks);
        return after;
    }

    const CailScript& script_;
    IndependencyGraph graph_;
    std::size_t pos_ = 0;
    std::vector<std::vector<Fragment>*> loops_;
};

}  // namespace detail

/// Builds the independency graph of a validated script.
///
/// Begin, the final End, every While header and every If branch point and join
/// become nodes. Symbols between two conjunctions label the edge joining them. A
/// loop body's last edge returns to its header; the header's exit edge carries the
/// symbols that follow the loop. Break edges end at the same node as that exit edge.
inline IndependencyGraph build_graph(const CailScript& script) {
    detail::check_structure(script.tokens);
    return detail::GraphBuilder(script).build();
}

using Cell = std::vector<std::string>;

struct GraphArray {
    std::string algorithm;
    std::vector<Cell> cells;
};

/// Non-empty edge labels ordered by the source position of their first symbol.
inline GraphArray to_graph_array(const IndependencyGraph& graph) {
    std::vector<const Edge*> labeled;
    for (const auto& e : graph.edges)
        if (!e.symbols.empty()) labeled.push_back(&e);
    if (labeled.empty()) throw EmptyGraph("graph '" + graph.name + "' has no symbols");
    std::sort(labeled.begin(), labeled.end(),
              [](const Edge* a, const Edge* b) { return a->first_symbol_token < b->first_symbol_token; });
    GraphArray array{graph.name, {}};
    for (const auto* e : labeled) array.cells.push_back(e->symbols);
    return array;
}

inline GraphArray graph_array_of(std::string_view source, const Scmt& scmt, std::string name) {
    return to_graph_array(build_graph(parse_cail(source, scmt, std::move(name))));
}

inline std::string join_symbols(const std::vector<std::string>& symbols, std::string_view sep = ", ") {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i) out += sep;
        out += symbols[i];
    }
    return out;
}

inline std::string node_name(const IndependencyGraph& graph, std::size_t node) {
    if (node == graph.entry) return "entry";
    if (node == graph.exit) return "exit";
    return "n" + std::to_string(node);
}

inline std::string export_dot(const IndependencyGraph& graph) {
    auto quoted = [](std::string_view s) {
        std::string out = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') out += '\\';
            out += c;
        }
        return out + "\"";
    };
    std::ostringstream dot;
    dot << "digraph " << quoted(graph.name.empty() ? "cail" : graph.name) << " {\n";
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
        const char* shape = "circle";
        switch (graph.nodes[i].kind) {
            case NodeKind::Entry:
            case NodeKind::Exit: shape = "doublecircle"; break;
            case NodeKind::LoopHeader: shape = "box"; break;
            case NodeKind::Branch: shape = "diamond"; break;
            case NodeKind::Join: shape = "point"; break;
        }
        dot << "  " << node_name(graph, i) << " [shape=" << shape << "];\n";
    }
    for (const auto& e : graph.edges) {
        dot << "  " << node_name(graph, e.from) << " -> " << node_name(graph, e.to);
        if (!e.symbols.empty()) dot << " [label=" << quoted(join_symbols(e.symbols)) << "]";
        dot << ";\n";
    }
    dot << "}\n";
    return dot.str();
}

}  // namespace ces::cail
