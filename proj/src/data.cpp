#include "pocf/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pocf/io.hpp"

namespace pocf {

Policy Policy::uniform_random(const GameSpec& g)
{
    return product(g, MixedProfile::uniform(g), "uniform_random");
}

Policy Policy::one_rand(const GameSpec& g)
{
    MixedProfile phi = MixedProfile::uniform(g);
    for (int j = 1; j < g.n(); ++j) {
        auto& p = phi.probs[j];
        std::fill(p.begin(), p.end(), 0.0);
        p[std::min<std::size_t>(1, p.size() - 1)] = 1.0;
    }
    return product(g, std::move(phi), "one_rand");
}

Policy Policy::product(const GameSpec& g, MixedProfile phi, std::string descriptor)
{
    phi.validate(g);
    Policy p;
    p.product_ = true;
    p.phi_ = std::move(phi);
    p.descriptor_ = std::move(descriptor);
    return p;
}

Policy Policy::explicit_table(const GameSpec& g, std::vector<std::pair<JointAction, double>> table,
                              std::string descriptor)
{
    Policy p;
    p.product_ = false;
    p.descriptor_ = std::move(descriptor);
    double total = 0.0;
    for (auto& [a, w] : table) {
        validate_action(g, a);
        if (w < 0.0) throw Error("explicit policy has a negative probability");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("explicit policy probabilities do not sum to 1");
    std::sort(table.begin(), table.end());
    double c = 0.0;
    for (auto& [a, w] : table) {
        if (!p.support_.empty() && p.support_.back() == a) throw Error("explicit policy lists an action twice");
        if (w <= 0.0) continue;
        p.support_.push_back(a);
        p.prob_.push_back(w);
        c += w;
        p.cdf_.push_back(c);
    }
    return p;
}

double Policy::probability(const GameSpec& g, const JointAction& a) const
{
    validate_action(g, a);
    if (product_) {
        double w = 1.0;
        for (int i = 0; i < g.n(); ++i) w *= phi_.probs[i][g.index_of(i, a.actions[i])];
        return w;
    }
    auto it = std::lower_bound(support_.begin(), support_.end(), a);
    return (it != support_.end() && *it == a) ? prob_[it - support_.begin()] : 0.0;
}

JointAction Policy::sample(const GameSpec& g, Rng& rng) const
{
    if (product_) {
        JointAction a;
        a.actions.resize(g.n());
        for (int i = 0; i < g.n(); ++i) {
            const auto& p = phi_.probs[i];
            const double u = uniform01(rng);
            double c = 0.0;
            std::size_t q = 0;
            for (; q + 1 < p.size(); ++q) {
                c += p[q];
                if (u < c) break;
            }
            while (p[q] == 0.0 && q > 0) --q;
            a.actions[i] = g.actions(i)[q];
        }
        return a;
    }
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t q = std::min<std::size_t>(it - cdf_.begin(), support_.size() - 1);
    return support_[q];
}

std::vector<double> size_density(const GameSpec& g, const MixedProfile& phi, int l)
{
    // Poisson-binomial recursion over agents.
    std::vector<double> d(g.n() + 1, 0.0);
    d[0] = 1.0;
    for (int i = 0; i < g.n(); ++i) {
        double p = 0.0;
        for (std::size_t q = 0; q < phi.probs[i].size(); ++q)
            if (has(g.actions(i)[q], l)) p += phi.probs[i][q];
        p = std::clamp(p, 0.0, 1.0);
        for (int s = i + 1; s >= 0; --s) {
            const double stay = d[s] * (1.0 - p);
            const double join = s > 0 ? d[s - 1] * p : 0.0;
            d[s] = stay + join;
        }
    }
    return d;
}

std::vector<double> size_density(const GameSpec& g, const Policy& rho, int l)
{
    if (rho.is_product()) return size_density(g, rho.profile(), l);
    std::vector<double> d(g.n() + 1, 0.0);
    for (std::size_t s = 0; s < rho.support().size(); ++s) {
        int c = 0;
        for (Mask m : rho.support()[s].actions) c += has(m, l);
        d[c] += rho.probabilities()[s];
    }
    return d;
}

double coalition_size_density(const GameSpec& g, const Policy& rho, int l, int alpha)
{
    if (l < 0 || l >= g.k()) throw Error("coalition index out of range");
    if (alpha < 0 || alpha > g.n()) return 0.0;
    return size_density(g, rho, l)[alpha];
}

double coalition_size_density(const GameSpec& g, const MixedProfile& phi, int l, int alpha)
{
    if (l < 0 || l >= g.k()) throw Error("coalition index out of range");
    if (alpha < 0 || alpha > g.n()) return 0.0;
    return size_density(g, phi, l)[alpha];
}

const char* to_string(Feedback f) { return f == Feedback::semi ? "semi" : "bandit"; }

Feedback parse_feedback(const std::string& s)
{
    if (s == "semi" || s == "semi-bandit" || s == "semi_bandit") return Feedback::semi;
    if (s == "bandit") return Feedback::bandit;
    throw Error("unknown feedback '" + s + "' (expected semi or bandit)");
}

std::pair<Record, Record> sample_record_both(const GameSpec& g, const Policy& rho, std::uint64_t seed,
                                             std::uint64_t m)
{
    Rng rng(derive_seed(seed, 0xda7a, m));
    Record semi;
    semi.a = rho.sample(g, rng);
    semi.semi = sample_utilities(g, semi.a, rng);
    Record bandit;
    bandit.a = semi.a;
    bandit.bandit = semi.semi.totals(g.n());
    return {std::move(semi), std::move(bandit)};
}

Record sample_record(const GameSpec& g, const Policy& rho, Feedback fb, std::uint64_t seed, std::uint64_t m)
{
    auto both = sample_record_both(g, rho, seed, m);
    return fb == Feedback::semi ? std::move(both.first) : std::move(both.second);
}

namespace {

Dataset empty_dataset(const GameSpec& g, const Policy& rho, std::int64_t M, Feedback fb, std::uint64_t seed)
{
    if (M < 0) throw Error("dataset size must be nonnegative");
    Dataset ds;
    ds.feedback = fb;
    ds.n = g.n();
    ds.k = g.k();
    ds.meta = {{"n", g.n()},
               {"k", g.k()},
               {"M", M},
               {"feedback", to_string(fb)},
               {"seed", seed},
               {"policy", rho.descriptor()},
               {"game", g.name()},
               {"game_hash", game_hash(g)}};
    return ds;
}

} // namespace

Dataset sample_dataset(const GameSpec& g, const Policy& rho, std::int64_t M, Feedback fb, std::uint64_t seed)
{
    Dataset ds = empty_dataset(g, rho, M, fb, seed);
    ds.records.resize(M);
#pragma omp parallel for schedule(static) if (M >= 256)
    for (std::int64_t m = 0; m < M; ++m) ds.records[m] = sample_record(g, rho, fb, seed, m);
    return ds;
}

namespace serial {

Dataset sample_dataset(const GameSpec& g, const Policy& rho, std::int64_t M, Feedback fb, std::uint64_t seed)
{
    Dataset ds = empty_dataset(g, rho, M, fb, seed);
    ds.records.reserve(M);
    for (std::int64_t m = 0; m < M; ++m) ds.records.push_back(sample_record(g, rho, fb, seed, m));
    return ds;
}

} // namespace serial

std::string game_hash(const GameSpec& g)
{
    const std::string s = game_to_json(g).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

void put_num(std::string& out, double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void put_action(std::string& out, Mask m)
{
    out += '[';
    bool first = true;
    for (int l = 0; l < 64; ++l)
        if (has(m, l)) {
            if (!first) out += ',';
            out += std::to_string(l + 1);
            first = false;
        }
    out += ']';
}

std::string record_line(const Dataset& ds, const Record& r)
{
    std::string s = "{\"a\":[";
    for (std::size_t i = 0; i < r.a.actions.size(); ++i) {
        if (i) s += ',';
        put_action(s, r.a.actions[i]);
    }
    s += "],\"fb\":{";
    if (ds.feedback == Feedback::semi) {
        s += "\"semi\":[";
        for (std::size_t t = 0; t < r.semi.slots.size(); ++t) {
            if (t) s += ',';
            const auto& p = r.semi.slots[t];
            s += '[' + std::to_string(p.i + 1) + ',' + std::to_string(p.j + 1) + ',' + std::to_string(p.l + 1) + ',';
            put_num(s, r.semi.values[t]);
            s += ']';
        }
    } else {
        s += "\"bandit\":[";
        for (std::size_t i = 0; i < r.bandit.size(); ++i) {
            if (i) s += ',';
            put_num(s, r.bandit[i]);
        }
    }
    s += "]}}";
    return s;
}

Mask parse_action(const nlohmann::json& j, int k)
{
    if (!j.is_array() || j.empty()) throw Error("action must be a nonempty list of coalition indices");
    Mask m = 0;
    for (const auto& x : j) {
        const int l = x.get<int>();
        if (l < 1 || l > k) throw Error("coalition index " + std::to_string(l) + " outside 1.." + std::to_string(k));
        m |= Mask{1} << (l - 1);
    }
    return m;
}

Record parse_record(const nlohmann::json& j, const Dataset& ds)
{
    Record r;
    const auto& a = j.at("a");
    if (!a.is_array() || static_cast<int>(a.size()) != ds.n) throw Error("record must list one action per agent");
    for (const auto& x : a) r.a.actions.push_back(parse_action(x, ds.k));
    const auto& fb = j.at("fb");
    if (ds.feedback == Feedback::semi) {
        for (const auto& e : fb.at("semi")) {
            if (!e.is_array() || e.size() != 4) throw Error("semi entry must be [i,j,l,v]");
            int i = e[0].get<int>() - 1, jj = e[1].get<int>() - 1, l = e[2].get<int>() - 1;
            const double v = e[3].get<double>();
            if (i < 0 || jj < 0 || i >= ds.n || jj >= ds.n || i == jj || l < 0 || l >= ds.k)
                throw Error("semi entry has an index out of range");
            if (!has(r.a.actions[i], l) || !has(r.a.actions[jj], l))
                throw Error("semi entry names a pair outside the coalition");
            if (v < -1.0 - 1e-12 || v > 1.0 + 1e-12) throw Error("semi value outside [-1,1]");
            if (i > jj) std::swap(i, jj);
            r.semi.slots.push_back({i, jj, l});
            r.semi.values.push_back(v);
        }
        // Canonical (l, i, j) order and exactly one entry per co-member pair.
        std::vector<std::size_t> ord(r.semi.slots.size());
        for (std::size_t t = 0; t < ord.size(); ++t) ord[t] = t;
        auto key = [&](std::size_t t) {
            const auto& p = r.semi.slots[t];
            return std::make_tuple(p.l, p.i, p.j);
        };
        std::sort(ord.begin(), ord.end(), [&](std::size_t x, std::size_t y) { return key(x) < key(y); });
        PairTable t;
        for (std::size_t q : ord) {
            t.slots.push_back(r.semi.slots[q]);
            t.values.push_back(r.semi.values[q]);
        }
        const auto expect = pair_slots_raw(r.a.actions.data(), ds.n, ds.k);
        if (expect.size() != t.slots.size()) throw Error("semi record does not list every co-member pair exactly once");
        for (std::size_t q = 0; q < expect.size(); ++q)
            if (expect[q].i != t.slots[q].i || expect[q].j != t.slots[q].j || expect[q].l != t.slots[q].l)
                throw Error("semi record does not list every co-member pair exactly once");
        r.semi = std::move(t);
    } else {
        const auto& b = fb.at("bandit");
        if (!b.is_array() || static_cast<int>(b.size()) != ds.n) throw Error("bandit entry must list n totals");
        for (const auto& x : b) r.bandit.push_back(x.get<double>());
    }
    return r;
}

} // namespace

std::string dataset_to_string(const Dataset& ds)
{
    nlohmann::json meta = ds.meta;
    meta["n"] = ds.n;
    meta["k"] = ds.k;
    meta["feedback"] = to_string(ds.feedback);
    meta["M"] = ds.records.size();
    std::string out = nlohmann::json{{"meta", meta}}.dump();
    out += '\n';
    for (const auto& r : ds.records) {
        out += record_line(ds, r);
        out += '\n';
    }
    return out;
}

Dataset dataset_from_string(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    Dataset ds;
    bool have_meta = false;
    std::int64_t expected = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (!have_meta) {
                ds.meta = j.at("meta");
                ds.n = ds.meta.at("n").get<int>();
                ds.k = ds.meta.at("k").get<int>();
                ds.feedback = parse_feedback(ds.meta.at("feedback").get<std::string>());
                if (ds.meta.contains("M")) expected = ds.meta.at("M").get<std::int64_t>();
                if (ds.n < 1 || ds.k < 1 || ds.k > kMaxCoalitions) throw Error("meta has invalid n or k");
                have_meta = true;
                continue;
            }
            ds.records.push_back(parse_record(j, ds));
        } catch (const std::exception& e) {
            throw Error("dataset line " + std::to_string(lineno) +
                        (have_meta ? " (record " + std::to_string(ds.records.size() + 1) + ")" : " (meta)") + ": " +
                        e.what());
        }
    }
    if (!have_meta) throw Error("dataset line 1 (meta): missing meta header");
    if (expected >= 0 && static_cast<std::int64_t>(ds.records.size()) != expected)
        throw Error("dataset line " + std::to_string(lineno + 1) + " (record " + std::to_string(ds.records.size() + 1) +
                    "): truncated, meta declares " + std::to_string(expected) + " records but " +
                    std::to_string(ds.records.size()) + " were read");
    return ds;
}

void write_dataset(const Dataset& ds, const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f << dataset_to_string(ds);
    if (!f) throw Error("failed writing " + path);
}

Dataset read_dataset(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return dataset_from_string(ss.str());
}

bool operator==(const Record& a, const Record& b)
{
    if (a.a != b.a || a.bandit != b.bandit || a.semi.values != b.semi.values) return false;
    if (a.semi.slots.size() != b.semi.slots.size()) return false;
    for (std::size_t t = 0; t < a.semi.slots.size(); ++t) {
        const auto &x = a.semi.slots[t], &y = b.semi.slots[t];
        if (x.i != y.i || x.j != y.j || x.l != y.l) return false;
    }
    return true;
}

bool operator==(const Dataset& a, const Dataset& b)
{
    return a.feedback == b.feedback && a.n == b.n && a.k == b.k && a.records == b.records;
}

} // namespace pocf
