#include "pocf/io.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pocf/builtins.hpp"
#include "pocf/models.hpp"

namespace pocf {

nlohmann::json mask_to_json(Mask m)
{
    nlohmann::json out = nlohmann::json::array();
    for (int l = 0; l < 64; ++l)
        if (has(m, l)) out.push_back(l + 1);
    return out;
}

Mask mask_from_json(const nlohmann::json& j, int k)
{
    if (!j.is_array() || j.empty()) throw Error("an action must be a nonempty list of coalitions");
    Mask m = 0;
    for (const auto& v : j) {
        const int l = v.get<int>();
        if (l < 1 || l > k) throw Error("coalition " + std::to_string(l) + " outside 1.." + std::to_string(k));
        m |= Mask{1} << (l - 1);
    }
    return m;
}

nlohmann::json joint_to_json(const JointAction& a)
{
    nlohmann::json out = nlohmann::json::array();
    for (Mask m : a.actions) out.push_back(mask_to_json(m));
    return out;
}

JointAction joint_from_json(const nlohmann::json& j, int k)
{
    if (!j.is_array()) throw Error("a joint action must be a list of per-agent actions");
    JointAction a;
    for (const auto& v : j) a.actions.push_back(mask_from_json(v, k));
    return a;
}

nlohmann::json profile_to_json(const GameSpec& g, const MixedProfile& phi)
{
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < g.n(); ++i) {
        nlohmann::json agent = nlohmann::json::array();
        for (std::size_t q = 0; q < g.actions(i).size(); ++q)
            agent.push_back({{"action", mask_to_json(g.actions(i)[q])}, {"p", phi.probs[i][q]}});
        out.push_back(agent);
    }
    return out;
}

nlohmann::json report_to_json(const GameSpec& g, const GapReport& r)
{
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& t : r.per_agent)
        agents.push_back({{"agent", t.agent + 1},
                          {"best_response", mask_to_json(t.best_action)},
                          {"ucb_value", t.ucb_value},
                          {"lcb_value", t.lcb_value},
                          {"term", t.ucb_value - t.lcb_value}});
    nlohmann::json out = {{"profile", profile_to_json(g, r.profile)},
                          {"surrogate_gap", r.surrogate_gap},
                          {"per_agent", agents},
                          {"exact_gap", r.exact_gap ? nlohmann::json(*r.exact_gap) : nlohmann::json()},
                          {"bound", r.bound ? nlohmann::json(*r.bound) : nlohmann::json()},
                          {"rounds", r.rounds},
                          {"exact", r.exact},
                          {"hit_max_rounds", r.hit_max_rounds},
                          {"regime", r.regime},
                          {"std_err", r.std_err},
                          {"eps_opt", r.eps_opt},
                          // The surrogate gap bounds the slack to the true minimizer from above.
                          {"eps_opt_upper", std::max(0.0, r.surrogate_gap)},
                          {"trace", r.trace}};
    return out;
}

nlohmann::json game_to_json(const GameSpec& g)
{
    if (is_builtin_name(g.name())) return {{"builtin", g.name()}};
    nlohmann::json d = g.model().describe();
    if (d.is_null()) throw Error("game model cannot be serialized");
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& s : g.action_sets()) {
        nlohmann::json a = nlohmann::json::array();
        for (Mask m : s) a.push_back(mask_to_json(m));
        sets.push_back(a);
    }
    nlohmann::json out = {{"n", g.n()}, {"k", g.k()}, {"action_sets", sets}};
    for (auto& [key, v] : d.items()) out[key] = v;
    return out;
}

GameSpec game_from_json(const nlohmann::json& j)
{
    if (j.contains("builtin")) return builtin_game(j.at("builtin").get<std::string>()).game;
    const int n = j.at("n").get<int>();
    const int k = j.at("k").get<int>();
    std::optional<std::vector<std::vector<Mask>>> sets;
    if (j.contains("action_sets")) {
        sets.emplace();
        for (const auto& s : j.at("action_sets")) {
            std::vector<Mask> as;
            for (const auto& a : s) as.push_back(mask_from_json(a, k));
            sets->push_back(std::move(as));
        }
    }
    if (j.contains("mean_table")) {
        if (!sets) throw Error("explicit games need action_sets");
        auto table = j.at("mean_table").get<std::vector<std::vector<std::vector<double>>>>();
        return GameSpec(n, k, std::move(*sets), std::make_shared<ExplicitModel>(std::move(table)));
    }
    if (j.contains("size_table")) {
        if (!sets) throw Error("size-table games need action_sets");
        auto table = j.at("size_table").get<std::vector<std::vector<double>>>();
        return GameSpec(n, k, std::move(*sets), std::make_shared<SizeTableModel>(std::move(table)));
    }
    if (j.contains("generator")) {
        const auto& gen = j.at("generator");
        const auto kind = parse_generator(gen.at("kind").get<std::string>());
        const auto params = gen.value("params", nlohmann::json::object());
        return make_generated_game(kind, n, k, gen.value("seed", std::uint64_t{0}), params, sets);
    }
    throw Error("game file needs one of builtin, mean_table, size_table or generator");
}

LoadedGame load_game(const std::string& arg)
{
    if (is_builtin_name(arg)) {
        auto b = builtin_game(arg);
        return {std::move(b.game), std::move(b.policy)};
    }
    if (!std::filesystem::exists(arg))
        throw Error("'" + arg + "' is neither a builtin game nor an existing file");
    const auto j = read_json_file(arg);
    if (j.contains("builtin")) return load_game(j.at("builtin").get<std::string>());
    return {game_from_json(j), std::nullopt};
}

Policy policy_from_json(const GameSpec& g, const nlohmann::json& j, const std::string& descriptor)
{
    std::vector<std::pair<JointAction, double>> table;
    for (const auto& e : j.at("support")) table.emplace_back(joint_from_json(e.at("a"), g.k()), e.at("p").get<double>());
    return Policy::explicit_table(g, std::move(table), descriptor);
}

Policy load_policy(const LoadedGame& lg, const std::string& arg)
{
    if (arg == "rand" || arg == "uniform_random") return Policy::uniform_random(lg.game);
    if (arg == "one_rand" || arg == "coalition_size") return Policy::one_rand(lg.game);
    if (arg == "builtin") {
        if (!lg.policy) throw Error("game '" + lg.game.name() + "' has no paired policy");
        return *lg.policy;
    }
    if (std::filesystem::exists(arg)) return policy_from_json(lg.game, read_json_file(arg), "file:" + arg);
    throw Error("unknown policy '" + arg + "' (expected rand, one_rand, coalition_size, builtin or a file)");
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

namespace {

class TomlReader
{
public:
    explicit TomlReader(const std::string& text) : s_(text) {}

    nlohmann::json parse()
    {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++p_;
                if (peek() == '[') fail("arrays of tables are not supported");
                auto path = key_path();
                expect(']');
                table = &root;
                for (auto& k : path) {
                    table = &(*table)[k];
                    if (table->is_null()) *table = nlohmann::json::object();
                    if (!table->is_object()) fail("table '" + k + "' redefines a value");
                }
            } else {
                auto path = key_path();
                expect('=');
                nlohmann::json* slot = table;
                for (std::size_t t = 0; t + 1 < path.size(); ++t) {
                    slot = &(*slot)[path[t]];
                    if (slot->is_null()) *slot = nlohmann::json::object();
                }
                if (slot->contains(path.back())) fail("duplicate key '" + path.back() + "'");
                (*slot)[path.back()] = value();
            }
            end_of_line();
        }
        return root;
    }

private:
    bool eof() const { return p_ >= s_.size(); }
    char peek() const { return eof() ? '\0' : s_[p_]; }

    [[noreturn]] void fail(const std::string& msg) const
    {
        int line = 1;
        for (std::size_t i = 0; i < p_ && i < s_.size(); ++i) line += s_[i] == '\n';
        throw Error("TOML line " + std::to_string(line) + ": " + msg);
    }

    void skip_space()
    {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++p_;
    }

    void skip_comment()
    {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++p_;
    }

    void skip_blank_lines()
    {
        while (!eof()) {
            skip_space();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                ++p_;
                continue;
            }
            break;
        }
    }

    // Whitespace, comments and newlines inside arrays.
    void skip_array_space()
    {
        while (!eof()) {
            skip_space();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                ++p_;
                continue;
            }
            break;
        }
    }

    void expect(char c)
    {
        skip_space();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++p_;
        skip_space();
    }

    void end_of_line()
    {
        skip_space();
        skip_comment();
        if (peek() == '\r') ++p_;
        if (!eof() && peek() != '\n') fail("unexpected trailing characters");
    }

    std::vector<std::string> key_path()
    {
        std::vector<std::string> out;
        while (true) {
            skip_space();
            if (peek() == '"') {
                out.push_back(string());
            } else {
                std::string k;
                while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
                    k += s_[p_++];
                if (k.empty()) fail("expected a key");
                out.push_back(k);
            }
            skip_space();
            if (peek() != '.') break;
            ++p_;
        }
        return out;
    }

    std::string string()
    {
        ++p_;
        std::string out;
        while (!eof() && peek() != '"') {
            if (peek() == '\n') fail("unterminated string");
            char c = s_[p_++];
            if (c == '\\') {
                const char e = s_[p_++];
                switch (e) {
                case 'n': c = '\n'; break;
                case 't': c = '\t'; break;
                case '"': c = '"'; break;
                case '\\': c = '\\'; break;
                default: fail(std::string("unsupported escape \\") + e);
                }
            }
            out += c;
        }
        if (eof()) fail("unterminated string");
        ++p_;
        return out;
    }

    nlohmann::json value()
    {
        skip_space();
        const char c = peek();
        if (c == '"') return string();
        if (c == '\'') {
            ++p_;
            std::string out;
            while (!eof() && peek() != '\'' && peek() != '\n') out += s_[p_++];
            if (peek() != '\'') fail("unterminated string");
            ++p_;
            return out;
        }
        if (c == '[') {
            ++p_;
            nlohmann::json arr = nlohmann::json::array();
            skip_array_space();
            while (peek() != ']') {
                arr.push_back(value());
                skip_array_space();
                if (peek() == ',') {
                    ++p_;
                    skip_array_space();
                } else if (peek() != ']') {
                    fail("expected ',' or ']'");
                }
            }
            ++p_;
            return arr;
        }
        std::string tok;
        while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '#')
            tok += s_[p_++];
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok.empty()) fail("expected a value");
        std::string clean;
        for (char ch : tok)
            if (ch != '_') clean += ch;
        const bool is_float = clean.find_first_of(".eE") != std::string::npos || clean == "inf" ||
                              clean == "+inf" || clean == "-inf" || clean == "nan";
        try {
            std::size_t used = 0;
            if (is_float) {
                const double v = std::stod(clean, &used);
                if (used == clean.size()) return v;
            } else {
                const long long v = std::stoll(clean, &used, 0);
                if (used == clean.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + tok + "'");
    }

    const std::string& s_;
    std::size_t p_ = 0;
};

} // namespace

nlohmann::json parse_toml(const std::string& text)
{
    return TomlReader(text).parse();
}

nlohmann::json read_config(const std::string& path)
{
    if (std::filesystem::path(path).extension() == ".toml") {
        std::ifstream in(path);
        if (!in) throw Error("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_toml(ss.str());
    }
    return read_json_file(path);
}

} // namespace pocf
