#ifndef ADMGAUG_ADMG_HPP
#define ADMGAUG_ADMG_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace admgaug {

using Edge = std::pair<std::size_t, std::size_t>;

/// Acyclic directed mixed graph over named vertices.
///
/// Vertices are identified by their declaration index. Directed edges keep
/// insertion order; bidirected edges are stored as (min, max). Duplicate
/// edges within one set are ignored. A pair may carry both a directed and a
/// bidirected edge. Acyclicity is checked by validate(), not on insertion.
class Admg {
public:
    Admg() = default;
    explicit Admg(std::vector<std::string> vertices);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& vertices() const noexcept { return names_; }
    const std::vector<Edge>& directed_edges() const noexcept { return directed_; }
    const std::vector<Edge>& bidirected_edges() const noexcept { return bidirected_; }

    std::optional<std::size_t> find(std::string_view name) const;
    // Throws UnknownVertex.
    std::size_t index_of(std::string_view name) const;

    // Both throw UnknownVertex for out-of-range endpoints and SelfLoop for a == b.
    void add_directed(std::size_t from, std::size_t to);
    void add_bidirected(std::size_t a, std::size_t b);
    void add_directed(std::string_view from, std::string_view to);
    void add_bidirected(std::string_view a, std::string_view b);

    bool has_directed(std::size_t from, std::size_t to) const;
    bool has_bidirected(std::size_t a, std::size_t b) const;

private:
    void check_endpoints(std::size_t a, std::size_t b) const;

    std::vector<std::string> names_;
    std::vector<Edge> directed_;
    std::vector<Edge> bidirected_;
};

/// A topological order of the directed part. Positions are 0-based.
struct TopoIndexing {
    std::vector<std::size_t> order;     // position -> vertex
    std::vector<std::size_t> position;  // vertex -> position

    std::size_t size() const noexcept { return order.size(); }
    bool operator==(const TopoIndexing&) const = default;
};

/// Markov pillows keyed by topological position; each entry is sorted and
/// holds only positions smaller than its key.
struct MarkovPillowTable {
    std::vector<std::vector<std::size_t>> pillows;

    const std::vector<std::size_t>& operator[](std::size_t position) const { return pillows[position]; }
    std::size_t size() const noexcept { return pillows.size(); }
};

/// Topological indexing with ties broken by declaration order: vertices are
/// visited in declaration order and each one is placed right after its
/// not-yet-placed ancestors. Throws CyclicGraph.
TopoIndexing validate(const Admg& graph);

/// District of position v inside the subgraph of positions <= v (sorted positions, contains v).
std::vector<std::size_t> district(const Admg& graph, const TopoIndexing& indexing, std::size_t v);

/// Markov pillow of every position, each computed within the prefix subgraph
/// ending at that position. The result depends on the chosen indexing.
MarkovPillowTable markov_pillow(const Admg& graph, const TopoIndexing& indexing);

/// Directed parents of every position, as sorted positions.
std::vector<std::vector<std::size_t>> parent_positions(const Admg& graph, const TopoIndexing& indexing);

/// True iff there are no directed edges and every vertex pair is bidirected.
bool is_uninformative(const Admg& graph);

/// Parsed contents of the line-oriented graph format.
struct GraphSpec {
    Admg graph;
    std::vector<std::string> discrete;  // names from `discrete:` lines, declaration order
};

/// Incremental parser for the graph text format. Other formats that extend it
/// (the SEM file) feed their remaining lines through `feed`.
class GraphTextParser {
public:
    explicit GraphTextParser(std::string source_name = "<graph>");

    // Returns false when the line is not graph syntax; throws ParseError when it is
    // but malformed. The line must already have its comment stripped.
    bool feed(std::string_view line, std::size_t line_no);
    GraphSpec finish();

    bool has_vertices() const noexcept { return declared_; }
    const Admg& graph() const noexcept { return spec_.graph; }
    const std::string& source_name() const noexcept { return source_; }

    [[noreturn]] void fail(std::size_t line_no, const std::string& message) const;

private:
    std::string source_;
    GraphSpec spec_;
    bool declared_ = false;
    std::vector<std::pair<std::string, std::size_t>> pending_discrete_;
};

GraphSpec parse_graph(std::string_view text, std::string source_name = "<graph>");
GraphSpec read_graph_file(const std::string& path);
std::string format_graph(const Admg& graph, const std::vector<std::string>& discrete = {});

namespace text {
std::string_view trim(std::string_view s);
std::string_view strip_comment(std::string_view line);
std::vector<std::string> split_list(std::string_view s, char sep = ',');
std::string read_file(const std::string& path);
}  // namespace text

}  // namespace admgaug

#endif  // ADMGAUG_ADMG_HPP
