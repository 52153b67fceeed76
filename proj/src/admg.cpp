#include "admgaug/admg.hpp"

#include "admgaug/error.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace admgaug {

namespace text {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r\n\v\f";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    return hash == std::string_view::npos ? line : line.substr(0, hash);
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace text

Admg::Admg(std::vector<std::string> vertices) : names_(std::move(vertices)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) throw Error(Errc::InvalidArgument, "empty vertex name");
        for (std::size_t k = 0; k < i; ++k) {
            if (names_[k] == names_[i]) throw Error(Errc::InvalidArgument, "duplicate vertex '" + names_[i] + "'");
        }
    }
}

std::optional<std::size_t> Admg::find(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Admg::index_of(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    throw Error(Errc::UnknownVertex, "vertex '" + std::string(name) + "' is not declared");
}

void Admg::check_endpoints(std::size_t a, std::size_t b) const {
    if (a >= size() || b >= size()) {
        throw Error(Errc::UnknownVertex, "edge endpoint index out of range");
    }
    if (a == b) throw Error(Errc::SelfLoop, "self-loop on '" + names_[a] + "'");
}

void Admg::add_directed(std::size_t from, std::size_t to) {
    check_endpoints(from, to);
    if (!has_directed(from, to)) directed_.emplace_back(from, to);
}

void Admg::add_bidirected(std::size_t a, std::size_t b) {
    check_endpoints(a, b);
    if (!has_bidirected(a, b)) bidirected_.emplace_back(std::min(a, b), std::max(a, b));
}

void Admg::add_directed(std::string_view from, std::string_view to) { add_directed(index_of(from), index_of(to)); }

void Admg::add_bidirected(std::string_view a, std::string_view b) { add_bidirected(index_of(a), index_of(b)); }

bool Admg::has_directed(std::size_t from, std::size_t to) const {
    return std::find(directed_.begin(), directed_.end(), Edge{from, to}) != directed_.end();
}

bool Admg::has_bidirected(std::size_t a, std::size_t b) const {
    const Edge key{std::min(a, b), std::max(a, b)};
    return std::find(bidirected_.begin(), bidirected_.end(), key) != bidirected_.end();
}

TopoIndexing validate(const Admg& graph) {
    const std::size_t d = graph.size();
    std::vector<std::vector<std::size_t>> parents(d);
    for (const auto& [from, to] : graph.directed_edges()) {
        if (from >= d || to >= d) throw Error(Errc::UnknownVertex, "edge endpoint index out of range");
        if (from == to) throw Error(Errc::SelfLoop, "self-loop on '" + graph.vertices()[from] + "'");
        parents[to].push_back(from);
    }
    for (auto& p : parents) std::sort(p.begin(), p.end());

    enum class Mark : unsigned char { Unvisited, Active, Done };
    std::vector<Mark> mark(d, Mark::Unvisited);
    TopoIndexing out;
    out.order.reserve(d);

    std::function<void(std::size_t)> place = [&](std::size_t v) {
        if (mark[v] == Mark::Done) return;
        if (mark[v] == Mark::Active) {
            throw Error(Errc::CyclicGraph, "directed cycle through '" + graph.vertices()[v] + "'");
        }
        mark[v] = Mark::Active;
        for (auto p : parents[v]) place(p);
        mark[v] = Mark::Done;
        out.order.push_back(v);
    };
    for (std::size_t v = 0; v < d; ++v) place(v);

    out.position.assign(d, 0);
    for (std::size_t pos = 0; pos < d; ++pos) out.position[out.order[pos]] = pos;
    return out;
}

namespace {

std::vector<std::vector<std::size_t>> bidirected_neighbours(const Admg& graph, const TopoIndexing& indexing) {
    std::vector<std::vector<std::size_t>> nb(graph.size());
    for (const auto& [a, b] : graph.bidirected_edges()) {
        nb[indexing.position[a]].push_back(indexing.position[b]);
        nb[indexing.position[b]].push_back(indexing.position[a]);
    }
    return nb;
}

std::vector<std::size_t> district_impl(const std::vector<std::vector<std::size_t>>& nb, std::size_t v) {
    std::vector<bool> seen(v + 1, false);
    std::vector<std::size_t> stack{v};
    seen[v] = true;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (auto w : nb[u]) {
            if (w <= v && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u <= v; ++u) {
        if (seen[u]) out.push_back(u);
    }
    return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> parent_positions(const Admg& graph, const TopoIndexing& indexing) {
    std::vector<std::vector<std::size_t>> pa(graph.size());
    for (const auto& [from, to] : graph.directed_edges()) {
        pa[indexing.position[to]].push_back(indexing.position[from]);
    }
    for (auto& p : pa) std::sort(p.begin(), p.end());
    return pa;
}

std::vector<std::size_t> district(const Admg& graph, const TopoIndexing& indexing, std::size_t v) {
    if (v >= graph.size()) throw Error(Errc::InvalidArgument, "position out of range");
    return district_impl(bidirected_neighbours(graph, indexing), v);
}

MarkovPillowTable markov_pillow(const Admg& graph, const TopoIndexing& indexing) {
    const std::size_t d = graph.size();
    const auto nb = bidirected_neighbours(graph, indexing);
    const auto pa = parent_positions(graph, indexing);

    MarkovPillowTable table;
    table.pillows.resize(d);
    for (std::size_t v = 0; v < d; ++v) {
        std::vector<bool> member(v + 1, false);
        for (auto u : district_impl(nb, v)) {
            member[u] = true;
            // parents always precede their child, so they lie inside the prefix subgraph
            for (auto p : pa[u]) member[p] = true;
        }
        member[v] = false;
        for (std::size_t u = 0; u < v; ++u) {
            if (member[u]) table.pillows[v].push_back(u);
        }
    }
    return table;
}

bool is_uninformative(const Admg& graph) {
    if (!graph.directed_edges().empty()) return false;
    const std::size_t d = graph.size();
    return graph.bidirected_edges().size() == d * (d - (d > 0 ? 1 : 0)) / 2;
}

// ---------------------------------------------------------------------------
// text format

namespace {

bool valid_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        if (c == ' ' || c == '\t' || c == ',' || c == '<' || c == '>' || c == '-' || c == ':' || c == '=' ||
            c == '[' || c == ']') {
            return false;
        }
    }
    return true;
}

bool starts_with_keyword(std::string_view line, std::string_view keyword, std::string_view& rest) {
    if (line.substr(0, keyword.size()) != keyword) return false;
    auto after = text::trim(line.substr(keyword.size()));
    if (after.empty() || after.front() != ':') return false;
    rest = text::trim(after.substr(1));
    return true;
}

}  // namespace

GraphTextParser::GraphTextParser(std::string source_name) : source_(std::move(source_name)) {}

void GraphTextParser::fail(std::size_t line_no, const std::string& message) const {
    throw Error(Errc::ParseError, source_ + ":" + std::to_string(line_no) + ": " + message);
}

bool GraphTextParser::feed(std::string_view raw, std::size_t line_no) {
    const auto line = text::trim(raw);
    if (line.empty()) return true;

    std::string_view rest;
    if (starts_with_keyword(line, "vertices", rest)) {
        if (declared_) fail(line_no, "duplicate 'vertices:' header");
        auto names = text::split_list(rest);
        if (names.empty()) fail(line_no, "no vertices declared");
        for (const auto& n : names) {
            if (!valid_name(n)) fail(line_no, "invalid vertex name '" + n + "'");
        }
        try {
            spec_.graph = Admg(std::move(names));
        } catch (const Error& e) {
            fail(line_no, e.what());
        }
        declared_ = true;
        return true;
    }
    if (starts_with_keyword(line, "discrete", rest)) {
        for (auto& n : text::split_list(rest)) {
            if (!valid_name(n)) fail(line_no, "invalid vertex name '" + n + "'");
            pending_discrete_.emplace_back(std::move(n), line_no);
        }
        return true;
    }

    bool bidirected = false;
    std::size_t op = line.find("<->");
    std::size_t op_len = 3;
    if (op != std::string_view::npos) {
        bidirected = true;
    } else {
        op = line.find("->");
        op_len = 2;
    }
    if (op == std::string_view::npos) return false;

    if (!declared_) fail(line_no, "edge before 'vertices:' header");
    const auto lhs = text::trim(line.substr(0, op));
    const auto rhs = text::trim(line.substr(op + op_len));
    if (!valid_name(lhs) || !valid_name(rhs)) fail(line_no, "malformed edge '" + std::string(line) + "'");
    try {
        if (bidirected) {
            spec_.graph.add_bidirected(lhs, rhs);
        } else {
            spec_.graph.add_directed(lhs, rhs);
        }
    } catch (const Error& e) {
        // keep the validation class, add location
        throw Error(e.code(), source_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
    return true;
}

GraphSpec GraphTextParser::finish() {
    if (!declared_) throw Error(Errc::ParseError, source_ + ": missing 'vertices:' header");
    for (const auto& [name, line_no] : pending_discrete_) {
        if (!spec_.graph.find(name)) {
            throw Error(Errc::UnknownVertex,
                        source_ + ":" + std::to_string(line_no) + ": discrete vertex '" + name + "' is not declared");
        }
        if (std::find(spec_.discrete.begin(), spec_.discrete.end(), name) == spec_.discrete.end()) {
            spec_.discrete.push_back(name);
        }
    }
    return std::move(spec_);
}

GraphSpec parse_graph(std::string_view content, std::string source_name) {
    GraphTextParser parser(std::move(source_name));
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        const auto end = content.find('\n', start);
        const auto line = content.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++line_no;
        const auto body = text::trim(text::strip_comment(line));
        if (!parser.feed(body, line_no)) parser.fail(line_no, "unrecognized line '" + std::string(body) + "'");
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return parser.finish();
}

GraphSpec read_graph_file(const std::string& path) { return parse_graph(text::read_file(path), path); }

std::string format_graph(const Admg& graph, const std::vector<std::string>& discrete) {
    std::ostringstream out;
    out << "vertices: ";
    for (std::size_t i = 0; i < graph.size(); ++i) out << (i ? ", " : "") << graph.vertices()[i];
    out << '\n';
    if (!discrete.empty()) {
        out << "discrete: ";
        for (std::size_t i = 0; i < discrete.size(); ++i) out << (i ? ", " : "") << discrete[i];
        out << '\n';
    }
    for (const auto& [a, b] : graph.directed_edges()) out << graph.vertices()[a] << " -> " << graph.vertices()[b] << '\n';
    for (const auto& [a, b] : graph.bidirected_edges()) out << graph.vertices()[a] << " <-> " << graph.vertices()[b] << '\n';
    return out.str();
}

}  // namespace admgaug
