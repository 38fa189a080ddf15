#include "stpi/io.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace stpi {

const std::string& TomlValue::str() const {
    if (!is_string()) throw ParseError(line, "expected a string");
    return std::get<std::string>(v);
}

long long TomlValue::integer() const {
    if (!is_int()) throw ParseError(line, "expected an integer");
    return std::get<long long>(v);
}

const std::vector<TomlValue>& TomlValue::array() const {
    if (!is_array()) throw ParseError(line, "expected an array");
    return std::get<std::vector<TomlValue>>(v);
}

const TomlValue* TomlTable::find(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
}

const TomlValue& TomlTable::get(const std::string& key) const {
    if (auto* v = find(key)) return *v;
    throw ParseError(line, "[" + name + "] is missing key '" + key + "'");
}

namespace {

// Cursor over the whole text so multi-line arrays keep accurate line numbers.
struct Reader {
    std::string_view s;
    std::size_t i = 0;
    int line = 1;

    bool eof() const { return i >= s.size(); }
    char peek() const { return eof() ? '\0' : s[i]; }
    char get() {
        char c = s[i++];
        if (c == '\n') ++line;
        return c;
    }
    void skip_inline_space() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') get();
    }
    // Whitespace, newlines and comments (inside arrays).
    void skip_all() {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') get();
            else if (c == '#') skip_comment();
            else break;
        }
    }
    void end_of_line() {
        skip_inline_space();
        skip_comment();
        if (!eof() && peek() != '\n') throw ParseError(line, std::string("unexpected '") + peek() + "'");
        if (!eof()) get();
    }
};

TomlValue parse_value(Reader& r) {
    TomlValue out;
    out.line = r.line;
    char c = r.peek();
    if (c == '"' || c == '\'') {
        r.get();
        std::string s;
        while (true) {
            if (r.eof() || r.peek() == '\n') throw ParseError(out.line, "unterminated string");
            char d = r.get();
            if (d == c) break;
            if (d == '\\' && c == '"') {
                if (r.eof()) throw ParseError(out.line, "unterminated string");
                char e = r.get();
                switch (e) {
                    case 'n': s += '\n'; break;
                    case 't': s += '\t'; break;
                    case '"': s += '"'; break;
                    case '\\': s += '\\'; break;
                    default: throw ParseError(r.line, std::string("unknown escape \\") + e);
                }
            } else {
                s += d;
            }
        }
        out.v = std::move(s);
        return out;
    }
    if (c == '[') {
        r.get();
        std::vector<TomlValue> items;
        r.skip_all();
        while (r.peek() != ']') {
            if (r.eof()) throw ParseError(out.line, "unterminated array");
            items.push_back(parse_value(r));
            r.skip_all();
            if (r.peek() == ',') {
                r.get();
                r.skip_all();
            } else if (r.peek() != ']') {
                throw ParseError(r.line, "expected ',' or ']' in array");
            }
        }
        r.get();
        out.v = std::move(items);
        return out;
    }
    std::string tok;
    while (!r.eof() && (std::isalnum(static_cast<unsigned char>(r.peek())) || std::string_view("+-_./").find(r.peek()) != std::string_view::npos))
        tok += r.get();
    if (tok.empty()) throw ParseError(out.line, "expected a value");
    std::size_t pos = 0;
    long long n = 0;
    try {
        n = std::stoll(tok, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != tok.size())
        throw ParseError(out.line, "bare value '" + tok + "' is not an integer; quote rationals such as \"1/2\"");
    out.v = n;
    return out;
}

std::string parse_key(Reader& r) {
    std::string k;
    while (!r.eof() && (std::isalnum(static_cast<unsigned char>(r.peek())) || r.peek() == '_' || r.peek() == '-')) k += r.get();
    if (k.empty()) throw ParseError(r.line, "expected a key");
    return k;
}

}  // namespace

std::vector<TomlTable> parse_toml(std::string_view text) {
    std::vector<TomlTable> tables{{"", 1, {}}};
    std::set<std::string> single;
    Reader r{text};
    while (!r.eof()) {
        r.skip_inline_space();
        if (r.peek() == '\n') {
            r.get();
            continue;
        }
        if (r.peek() == '#') {
            r.skip_comment();
            continue;
        }
        if (r.eof()) break;
        const int line = r.line;
        if (r.peek() == '[') {
            r.get();
            bool array = r.peek() == '[';
            if (array) r.get();
            r.skip_inline_space();
            std::string name = parse_key(r);
            r.skip_inline_space();
            if (r.peek() != ']') throw ParseError(line, "expected ']' after table name");
            r.get();
            if (array) {
                if (r.peek() != ']') throw ParseError(line, "expected ']]' after table name");
                r.get();
            } else if (!single.insert(name).second) {
                throw ParseError(line, "table [" + name + "] defined twice");
            }
            r.end_of_line();
            tables.push_back({name, line, {}});
            continue;
        }
        std::string key = parse_key(r);
        r.skip_inline_space();
        if (r.peek() != '=') throw ParseError(line, "expected '=' after key '" + key + "'");
        r.get();
        r.skip_inline_space();
        TomlValue v = parse_value(r);
        r.end_of_line();
        if (!tables.back().entries.emplace(key, std::move(v)).second)
            throw ParseError(line, "duplicate key '" + key + "'");
    }
    if (tables.front().entries.empty()) tables.erase(tables.begin());
    return tables;
}

namespace {

void only_keys(const TomlTable& t, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : t.entries) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ParseError(v.line, "unknown key '" + k + "' in [" + t.name + "]");
    }
}

std::string scalar_text(const TomlValue& v) {
    if (v.is_string()) return v.str();
    if (v.is_int()) return std::to_string(v.integer());
    throw ParseError(v.line, "expected a string or integer");
}

std::vector<std::string> string_list(const TomlValue& v) {
    std::vector<std::string> out;
    for (const auto& x : v.array()) out.push_back(scalar_text(x));
    return out;
}

Rational rational_of(const TomlValue& v) {
    try {
        return parse_rational(scalar_text(v));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(v.line, e.what());
    }
}

std::vector<Rational> rational_list(const TomlValue& v) {
    std::vector<Rational> out;
    for (const auto& x : v.array()) out.push_back(rational_of(x));
    return out;
}

Matrix rational_matrix(const TomlValue& v) {
    Matrix m;
    for (const auto& row : v.array()) m.push_back(rational_list(row));
    return m;
}

int int_of(const TomlValue& v) { return static_cast<int>(v.integer()); }

std::optional<Coord> coord_of(const std::string& id) {
    auto slash = id.find('/');
    if (slash == std::string::npos) return std::nullopt;
    try {
        std::size_t a = 0, b = 0;
        int j = std::stoi(id.substr(0, slash), &a), t = std::stoi(id.substr(slash + 1), &b);
        if (a != slash || b != id.size() - slash - 1) return std::nullopt;
        return Coord{j, t};
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

std::vector<Matrix> kernels(const TomlValue& v, int T) {
    const auto& a = v.array();
    if (a.empty()) throw ParseError(v.line, "empty kernel");
    bool per_step = a[0].is_array() && !a[0].array().empty() && a[0].array()[0].is_array();
    if (!per_step) return std::vector<Matrix>(std::max(T - 1, 0), rational_matrix(v));
    std::vector<Matrix> out;
    for (const auto& m : a) out.push_back(rational_matrix(m));
    return out;
}

// A two-row Markov chain whose kernel factorises into environment and memory kernels.
PaLoop loop_from_markov(const MarkovSpec& spec, int m_row, int line) {
    if (spec.J != 2) throw ParseError(line, "m_row needs a [markov] chain with J = 2");
    if (m_row != 1 && m_row != 2) throw ParseError(line, "m_row must be 1 or 2");
    const int e_row = 3 - m_row;
    PaLoop l;
    l.e_states = spec.states_of(e_row);
    l.m_states = spec.states_of(m_row);
    l.T = spec.T;
    const int ne = static_cast<int>(l.e_states.size()), nm = static_cast<int>(l.m_states.size());
    auto slice = [&](int e, int m) { return static_cast<std::size_t>(m_row == 2 ? e * nm + m : m * ne + e); };
    l.e0.assign(ne, Rational(0));
    l.m0.assign(nm, Rational(0));
    for (int e = 0; e < ne; ++e)
        for (int m = 0; m < nm; ++m) {
            l.e0[e] += spec.initial[slice(e, m)];
            l.m0[m] += spec.initial[slice(e, m)];
        }
    for (int e = 0; e < ne; ++e)
        for (int m = 0; m < nm; ++m)
            if (spec.initial[slice(e, m)] != l.e0[e] * l.m0[m])
                throw ParseError(line, "initial distribution does not factorise into environment and memory parts");
    Matrix env(ne * nm, std::vector<Rational>(ne, Rational(0))), mem(ne * nm, std::vector<Rational>(nm, Rational(0)));
    for (int e = 0; e < ne; ++e)
        for (int m = 0; m < nm; ++m) {
            auto col = slice(e, m);
            for (int e2 = 0; e2 < ne; ++e2)
                for (int m2 = 0; m2 < nm; ++m2) {
                    env[e * nm + m][e2] += spec.matrix[slice(e2, m2)][col];
                    mem[e * nm + m][m2] += spec.matrix[slice(e2, m2)][col];
                }
            for (int e2 = 0; e2 < ne; ++e2)
                for (int m2 = 0; m2 < nm; ++m2)
                    if (spec.matrix[slice(e2, m2)][col] != env[e * nm + m][e2] * mem[e * nm + m][m2])
                        throw ParseError(line, "markov kernel does not factorise into environment and memory kernels");
        }
    l.env_kernel.assign(l.T - 1, env);
    l.mem_kernel.assign(l.T - 1, mem);
    return l;
}

template <class F>
auto rethrow_at(int line, F&& f) {
    try {
        return f();
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(line, e.what());
    }
}

}  // namespace

SystemFile parse_system(std::string_view text, Caps caps) {
    SystemFile sys;
    std::vector<const TomlTable*> nodes;
    const TomlTable* markov = nullptr;
    const TomlTable* paloop = nullptr;
    const auto tables = parse_toml(text);
    for (const auto& t : tables) {
        if (t.name == "net") {
            only_keys(t, {"name"});
            if (auto* v = t.find("name")) sys.name = v->str();
        } else if (t.name == "node") {
            only_keys(t, {"id", "label", "states", "parents", "cpt"});
            nodes.push_back(&t);
        } else if (t.name == "markov") {
            only_keys(t, {"J", "T", "states", "matrix", "initial", "driving"});
            markov = &t;
        } else if (t.name == "paloop") {
            only_keys(t, {"m_row", "e_states", "m_states", "T", "e0", "m0", "env_kernel", "mem_kernel"});
            paloop = &t;
        } else if (t.name == "group") {
            only_keys(t, {"name", "generators"});
            sys.groups.push_back({t.get("name").str(), string_list(t.get("generators")), t.line});
        } else {
            throw ParseError(t.line, t.name.empty() ? "keys outside any table" : "unknown table [" + t.name + "]");
        }
    }
    if (sys.name.empty()) sys.name = "system";

    if (markov) {
        const auto& t = *markov;
        MarkovSpec s;
        s.name = sys.name;
        s.J = int_of(t.get("J"));
        s.T = int_of(t.get("T"));
        const auto& st = t.get("states");
        if (!st.array().empty() && st.array()[0].is_array())
            for (const auto& row : st.array()) s.states.push_back(string_list(row));
        else
            s.states.push_back(string_list(st));
        s.matrix = rational_matrix(t.get("matrix"));
        s.initial = rational_list(t.get("initial"));
        if (auto* d = t.find("driving"))
            for (const auto& x : d->array()) s.driving.push_back(int_of(x));
        // Building validates the chain definition.
        BayesNet built = rethrow_at(t.line, [&] { return build_markov_chain(s, caps); });
        sys.markov = s;
        if (nodes.empty()) sys.net = std::move(built);
    }

    if (paloop) {
        const auto& t = *paloop;
        PaLoop l;
        if (auto* mr = t.find("m_row")) {
            if (!sys.markov) throw ParseError(mr->line, "m_row refers to a [markov] section that is missing");
            for (const char* k : {"e_states", "m_states", "T", "e0", "m0", "env_kernel", "mem_kernel"})
                if (t.find(k)) throw ParseError(t.line, std::string("key '") + k + "' conflicts with m_row");
            l = loop_from_markov(*sys.markov, int_of(*mr), mr->line);
        } else {
            l.e_states = string_list(t.get("e_states"));
            l.m_states = string_list(t.get("m_states"));
            l.T = int_of(t.get("T"));
            l.e0 = rational_list(t.get("e0"));
            l.m0 = rational_list(t.get("m0"));
            l.env_kernel = kernels(t.get("env_kernel"), l.T);
            l.mem_kernel = kernels(t.get("mem_kernel"), l.T);
        }
        rethrow_at(t.line, [&] {
            validate(l);
            return 0;
        });
        sys.paloop = l;
        if (!sys.net && nodes.empty()) sys.net = build_pa_net(l);
    }

    if (!nodes.empty()) {
        std::vector<BayesNet::NodeSpec> specs;
        for (const auto* t : nodes) {
            BayesNet::NodeSpec n;
            const std::string id = t->get("id").str();
            n.id.coord = coord_of(id);
            n.id.label = t->find("label") ? t->get("label").str() : id;
            n.space.symbols = string_list(t->get("states"));
            if (auto* p = t->find("parents")) n.parents = string_list(*p);
            n.rows = rational_matrix(t->get("cpt"));
            specs.push_back(std::move(n));
        }
        // Parents may be written as ids; map them to labels.
        std::map<std::string, std::string> label_of;
        for (std::size_t k = 0; k < specs.size(); ++k)
            label_of.emplace(nodes[k]->get("id").str(), specs[k].id.label);
        for (std::size_t k = 0; k < specs.size(); ++k)
            for (auto& p : specs[k].parents) {
                auto it = label_of.find(p);
                if (it == label_of.end()) throw ParseError(nodes[k]->get("parents").line, "unknown parent '" + p + "'");
                p = it->second;
            }
        sys.net = rethrow_at(nodes.front()->line, [&] { return BayesNet::build(sys.name, std::move(specs), caps); });
    }
    if (!sys.net) throw ParseError(0, "system file defines no net: add [[node]], [markov] or [paloop]");
    for (const auto& g : sys.groups) resolve_group(*sys.net, g);
    return sys;
}

SystemFile load_system(const std::string& path, Caps caps) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open system file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_system(ss.str(), caps);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.detail());
    }
}

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string string_array(const std::vector<std::string>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quote(v[i]);
    return out + "]";
}

std::string rational_array(const std::vector<Rational>& v) {
    std::vector<std::string> s;
    for (const auto& q : v) s.push_back(to_string(q));
    return string_array(s);
}

std::string matrix_text(const Matrix& m) {
    std::string out = "[\n";
    for (const auto& row : m) out += "  " + rational_array(row) + ",\n";
    return out + "]";
}

}  // namespace

std::string write_system(const BayesNet& net) {
    std::ostringstream out;
    out << "[net]\nname = " << quote(net.name()) << "\n";
    for (int i = 0; i < net.size(); ++i) {
        const std::string id = net.node_name(i);
        out << "\n[[node]]\nid = " << quote(id) << "\n";
        if (net.id(i).label != id) out << "label = " << quote(net.id(i).label) << "\n";
        out << "states = " << string_array(net.space(i).symbols) << "\n";
        std::vector<std::string> ps;
        for (int p : net.mechanism(i).parents) ps.push_back(net.node_name(p));
        out << "parents = " << string_array(ps) << "\n";
        out << "cpt = " << matrix_text(net.mechanism(i).rows) << "\n";
    }
    return out.str();
}

std::string write_markov(const MarkovSpec& spec) {
    std::ostringstream out;
    out << "[net]\nname = " << quote(spec.name) << "\n\n[markov]\nJ = " << spec.J << "\nT = " << spec.T << "\n";
    if (spec.states.size() == 1) {
        out << "states = " << string_array(spec.states[0]) << "\n";
    } else {
        out << "states = [";
        for (std::size_t j = 0; j < spec.states.size(); ++j) out << (j ? ", " : "") << string_array(spec.states[j]);
        out << "]\n";
    }
    out << "matrix = " << matrix_text(spec.matrix) << "\n";
    out << "initial = " << rational_array(spec.initial) << "\n";
    if (!spec.driving.empty()) {
        out << "driving = [";
        for (std::size_t k = 0; k < spec.driving.size(); ++k) out << (k ? ", " : "") << spec.driving[k];
        out << "]\n";
    }
    return out.str();
}

int resolve_node(const BayesNet& net, const std::string& id) {
    if (net.has_coords())
        if (auto c = coord_of(id))
            if (auto n = net.find(c->j, c->t)) return *n;
    if (auto n = net.find(id)) return *n;
    throw std::invalid_argument("unknown node '" + id + "'");
}

Permutation parse_cycles(const BayesNet& net, const std::string& text) {
    std::vector<std::vector<int>> cycles;
    std::size_t i = 0;
    auto space = [&] {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };
    space();
    while (i < text.size()) {
        if (text[i] != '(') throw std::invalid_argument("expected '(' in cycle notation '" + text + "'");
        auto close = text.find(')', i);
        if (close == std::string::npos) throw std::invalid_argument("unterminated cycle in '" + text + "'");
        std::stringstream ss(text.substr(i + 1, close - i - 1));
        std::vector<int> cyc;
        std::string tok;
        while (ss >> tok) {
            if (!tok.empty() && tok.back() == ',') tok.pop_back();
            if (!tok.empty()) cyc.push_back(resolve_node(net, tok));
        }
        if (!cyc.empty()) cycles.push_back(std::move(cyc));
        i = close + 1;
        space();
    }
    return Permutation::from_cycles(net.size(), cycles);
}

GeneratedGroup resolve_group(const BayesNet& net, const NamedGroup& g) {
    std::vector<Permutation> gens;
    for (const auto& s : g.generators) gens.push_back(rethrow_at(g.line, [&] { return parse_cycles(net, s); }));
    return GeneratedGroup(std::move(gens));
}

// ---------------------------------------------------------------- reports

Json rational_json(const Rational& q) { return Json{{"ratio", to_string(q)}, {"bits", log2q(q)}}; }

Json probability_json(const Rational& q) { return Json{{"exact", to_string(q)}, {"float", to_double(q)}}; }

std::string partition_text(const BayesNet& net, const SetPartition& pi) {
    return render_partition(pi, [&](int n) { return net.node_name(n); });
}

Json hierarchy_json(const BayesNet& net, const Hierarchy& h, const RefinementFreeHierarchy& rf, std::size_t elide_above) {
    Json levels = Json::array();
    for (std::size_t l = 0; l < h.levels.size(); ++l) {
        const auto& lv = h.levels[l];
        Json row{{"level", l + 1},
                 {"ratio", to_string(lv.sli.ratio)},
                 {"bits", lv.sli.bits()},
                 {"partition_count", lv.partitions.size()},
                 {"refinement_free_count", rf.levels[l].partitions.size()}};
        if (lv.partitions.size() <= elide_above) {
            Json ps = Json::array();
            for (const auto& pi : lv.partitions) ps.push_back(partition_text(net, pi));
            row["partitions"] = std::move(ps);
        }
        Json free = Json::array();
        for (const auto& pi : rf.levels[l].partitions) free.push_back(partition_text(net, pi));
        row["refinement_free"] = std::move(free);
        levels.push_back(std::move(row));
    }
    return Json{{"trajectory", render_pattern(net, h.trajectory)},
                {"probability", probability_json(joint_probability(net, h.trajectory))},
                {"levels", std::move(levels)}};
}

Json entity_json(const BayesNet& net, const Pattern& p, const SliValue& iota) {
    Json j{{"pattern", render_pattern(net, p)}, {"iota", rational_json(iota.ratio)}, {"size", p.size()}};
    if (net.has_coords()) {
        auto kind = classify_composite(net, p);
        j["spatial"] = kind.spatial;
        j["temporal"] = kind.temporal;
        j["traverses_dof"] = traverses_dof(net, p);
        j["grid"] = render_grid(net, p);
    }
    j["trajectories"] = trajectory_set(net, p).size();
    return j;
}

Json co_action_json(const BayesNet& net, const CoActionPair& c) {
    Json j{{"t", c.t},
           {"kind", to_string(c.kind)},
           {"actor", render_pattern(net, c.actor)},
           {"actor_trajectory", render_pattern(net, c.actor_trajectory)},
           {"coactor", render_pattern(net, c.coactor)},
           {"coactor_trajectory", render_pattern(net, c.coactor_trajectory)}};
    if (net.has_coords()) {
        j["actor_grid"] = render_grid(net, c.actor);
        j["coactor_grid"] = render_grid(net, c.coactor);
    }
    return j;
}

Json perceptions_json(const BayesNet& net, const CoPerceptionContext& ctx, const Perceptions& p) {
    auto list = [&](const std::vector<Pattern>& ps) {
        Json a = Json::array();
        for (const auto& x : ps) a.push_back(render_pattern(net, x));
        return a;
    };
    Json branches = Json::array();
    for (std::size_t b = 0; b < p.branches.size(); ++b)
        branches.push_back(Json{{"branch", b},
                                {"slice", render_pattern(net, time_window(net, p.branches[b].front(), ctx.t + 1, ctx.t + ctx.r))},
                                {"members", list(p.branches[b])}});
    Json morphs = Json::array();
    for (const auto& m : p.morphs) {
        Json dist = Json::array();
        for (const auto& q : m.distribution) dist.push_back(probability_json(q));
        morphs.push_back(Json{{"environment", render_pattern(net, m.environment)}, {"distribution", std::move(dist)}});
    }
    Json blocks = Json::array();
    for (const auto& b : p.blocks) blocks.push_back(list(b));
    return Json{{"anchor", render_pattern(net, ctx.anchor)},
                {"t", ctx.t},
                {"r", ctx.r},
                {"co_perception_entities", list(ctx.members)},
                {"zeta", ctx.zeta ? list(*ctx.zeta) : Json(nullptr)},
                {"branches", std::move(branches)},
                {"morphs", std::move(morphs)},
                {"perceptions", std::move(blocks)}};
}

std::string hierarchy_dot(const BayesNet& net, const Level& level, const std::string& name) {
    return hasse_dot(level.partitions, name, [&](int n) { return net.node_name(n); });
}

}  // namespace stpi
