#pragma once

#include "stpi/agency.hpp"
#include "stpi/disintegration.hpp"
#include "stpi/model.hpp"
#include "stpi/symmetry.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace stpi {

// Any error in a system file or a command-line literal; `line` is 0 when not tied to a file line.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& msg)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line), detail_(msg) {}
    int line() const { return line_; }
    const std::string& detail() const { return detail_; }

private:
    int line_;
    std::string detail_;
};

// ---- minimal TOML subset: [table], [[array-of-tables]], key = string | integer | nested array ----

struct TomlValue {
    std::variant<std::string, long long, std::vector<TomlValue>> v;
    int line = 0;

    bool is_string() const { return v.index() == 0; }
    bool is_int() const { return v.index() == 1; }
    bool is_array() const { return v.index() == 2; }
    const std::string& str() const;
    long long integer() const;
    const std::vector<TomlValue>& array() const;
};

struct TomlTable {
    std::string name;
    int line = 0;
    std::map<std::string, TomlValue> entries;

    const TomlValue& get(const std::string& key) const;
    const TomlValue* find(const std::string& key) const;
};

std::vector<TomlTable> parse_toml(std::string_view text);

// ---- system files ----

struct NamedGroup {
    std::string name;
    std::vector<std::string> generators;  // cycle notation over node ids, e.g. "(1/0 1/1)(2/0 2/1)"
    int line = 0;
};

struct SystemFile {
    std::string name;
    std::optional<BayesNet> net;
    std::optional<MarkovSpec> markov;
    std::optional<PaLoop> paloop;
    std::vector<NamedGroup> groups;
};

// The analysed net comes from [[node]] sections, else [markov], else [paloop].
SystemFile parse_system(std::string_view text, Caps caps = {});
SystemFile load_system(const std::string& path, Caps caps = {});

std::string write_system(const BayesNet& net);
std::string write_markov(const MarkovSpec& spec);

// Node ids in the `j/t` form when coordinates exist, labels otherwise.
int resolve_node(const BayesNet& net, const std::string& id);
Permutation parse_cycles(const BayesNet& net, const std::string& text);
GeneratedGroup resolve_group(const BayesNet& net, const NamedGroup& g);

// ---- reports ----

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& q);  // {"ratio": "p/q", "bits": log2}
Json probability_json(const Rational& q);  // {"exact": "p/q", "float": q}
std::string partition_text(const BayesNet& net, const SetPartition& pi);

// Partitions are listed only for levels with at most `elide_above` members.
Json hierarchy_json(const BayesNet& net, const Hierarchy& h, const RefinementFreeHierarchy& rf, std::size_t elide_above);
// Includes composite and degree-of-freedom classification and the number of possible trajectories containing p.
Json entity_json(const BayesNet& net, const Pattern& p, const SliValue& iota);
Json co_action_json(const BayesNet& net, const CoActionPair& c);
Json perceptions_json(const BayesNet& net, const CoPerceptionContext& ctx, const Perceptions& p);

std::string hierarchy_dot(const BayesNet& net, const Level& level, const std::string& name);

}  // namespace stpi
