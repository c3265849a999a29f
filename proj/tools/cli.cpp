#include "cli.hpp"

#include "shiftbound/clt.hpp"
#include "shiftbound/harnack.hpp"
#include "shiftbound/ou_exact.hpp"
#include "shiftbound/shift_schedule.hpp"
#include "shiftbound/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace shiftbound::cli {

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flag and config values by name; flags override the config file.
class Params {
public:
    std::map<std::string, std::string> raw;

    bool has(const std::string& k) const { return raw.count(k) > 0; }

    std::string str(const std::string& k, const std::string& def) const {
        const auto it = raw.find(k);
        return it == raw.end() ? def : it->second;
    }

    std::string str(const std::string& k) const {
        const auto it = raw.find(k);
        if (it == raw.end()) throw ConfigError("missing required parameter --" + k);
        return it->second;
    }

    double num(const std::string& k) const { return parse_double(k, str(k)); }
    double num(const std::string& k, double def) const { return has(k) ? num(k) : def; }

    std::int64_t integer(const std::string& k) const {
        const std::string s = str(k);
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw ConfigError("--" + k + " expects an integer, got '" + s + "'");
        return v;
    }
    std::int64_t integer(const std::string& k, std::int64_t def) const { return has(k) ? integer(k) : def; }

    RenyiOrder order(const std::string& k, double def) const {
        if (!has(k)) return RenyiOrder::of(def);
        const std::string s = str(k);
        if (s == "kl" || s == "KL") return RenyiOrder::kl();
        const double q = parse_double(k, s);
        if (!(q > 0)) throw ConfigError("--" + k + " must be positive");
        return RenyiOrder::of(q);
    }

private:
    static double parse_double(const std::string& k, const std::string& s) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != s.size() || s.empty()) throw ConfigError("--" + k + " expects a number, got '" + s + "'");
        return v;
    }
};

std::string json_number(double v) {
    return std::isfinite(v) ? format_double(v) : "\"" + format_double(v) + "\"";
}

std::string json_string(const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') o += '\\';
        o += c;
    }
    return o + "\"";
}

std::string json_bool(bool b) { return b ? "true" : "false"; }

// Table emitted as CSV or as a JSON array of objects; cells hold JSON literals.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write_csv(std::ostream& os) const {
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                std::string c = r[i];
                if (c.size() >= 2 && c.front() == '"') c = c.substr(1, c.size() - 2);
                os << (i ? "," : "") << c;
            }
            os << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        os << "[";
        for (std::size_t j = 0; j < rows.size(); ++j) {
            os << (j ? ",\n " : "\n ") << "{";
            for (std::size_t i = 0; i < header.size(); ++i)
                os << (i ? ", " : "") << json_string(header[i]) << ": " << rows[j][i];
            os << "}";
        }
        os << "\n]\n";
    }
};

struct Context {
    Params params;
    std::string format;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    std::uint64_t seed = sim::kDefaultSeed;
    int threads = 1;
};

void emit(Context& ctx, const Table& t, const std::string& default_format) {
    const std::string fmt = ctx.format.empty() ? default_format : ctx.format;
    if (fmt == "csv")
        t.write_csv(*ctx.out);
    else
        t.write_json(*ctx.out);
}

std::vector<std::string> bound_cells(const BoundReport& r) {
    return {json_number(r.order.value()), json_number(r.constant), json_string(to_string(r.cost_kind)),
            json_bool(r.finite), json_string(r.theorem_tag), json_number(r.value)};
}

const std::vector<std::string> kBoundHeader{"order", "constant", "cost_kind", "finite", "theorem_tag", "value"};
const std::vector<std::string> kCheckHeader{"case_id", "lhs", "rhs", "se", "holds"};

std::vector<std::string> check_cells(const std::string& id, double lhs, double rhs, double se, bool holds) {
    return {json_string(id), json_number(lhs), json_number(rhs), json_number(se), json_bool(holds)};
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

// bound

int cmd_bound(Context& ctx, const std::string& kind) {
    const auto& p = ctx.params;
    BoundReport r;
    if (kind == "multi-step") {
        r = multi_step_bound(KernelSpec::abstract_kernel(p.num("c"), p.num("L")), p.integer("N"), p.order("q", 2),
                             p.num("sqdist"));
    } else if (kind == "langevin-discrete") {
        const double a = p.num("alpha");
        r = langevin_discrete_bound(KernelSpec::langevin_euler(a, p.num("beta", a), p.num("h")), p.integer("N"),
                                    p.order("q", 2), SquaredDistance{p.num("sqdist")});
    } else if (kind == "langevin-continuous") {
        r = langevin_continuous_bound(p.num("alpha"), p.num("T"), p.order("q", 2), SquaredDistance{p.num("sqdist")});
    } else if (kind == "mult-noise") {
        const double a = p.num("alpha");
        r = mult_noise_bound(KernelSpec::ito_euler(a, p.num("beta", a), p.num("lambda", 2), p.num("Lambda", 2), p.num("h")),
                             p.integer("N"), p.num("sqdist"));
    } else if (kind == "clt") {
        const std::string d = p.str("density", "gaussian");
        require(d == "gaussian" || d == "logistic", "--density must be gaussian or logistic");
        const auto rho = d == "gaussian" ? clt::DensitySpec::gaussian(p.num("param", 1)) : clt::DensitySpec::logistic(p.num("param", 1));
        r = clt::clt_regularity(rho, p.num("x", 0), p.num("y", 1)).bound;
    } else if (kind == "compose-orders") {
        r = compose_order_bound(p.order("q0", 2), p.order("q1", 2), p.num("C", 1), p.num("sqdist", 1));
    } else {
        throw ConfigError("unknown bound kind '" + kind + "'");
    }
    const std::string fmt = ctx.format.empty() ? "json" : ctx.format;
    if (fmt == "json") {
        *ctx.out << to_json(r) << "\n";
    } else {
        Table t{kBoundHeader, {bound_cells(r)}};
        t.write_csv(*ctx.out);
    }
    return kOk;
}

// verify

struct Suite {
    Table table;
    std::vector<std::string> failures;
    std::string summary;
};

Suite verify_ou(const Context& ctx) {
    const auto& p = ctx.params;
    const double alpha = p.num("alpha", 1), h = p.num("h", 0.1);
    const std::int64_t N = p.integer("N", 20), cases = p.integer("cases", 50);
    const RenyiOrder q = p.order("q", 2);
    require(cases >= 1, "--cases must be positive");
    const auto spec = OUSpec::discrete(alpha, h, N);
    const auto kernel = KernelSpec::langevin_euler(alpha, alpha, h);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> u(-3, 3);
    Suite s{{kCheckHeader, {}}, {}, {}};
    double worst = 0;
    for (std::int64_t i = 0; i < cases; ++i) {
        const double x = u(rng), y = u(rng);
        const auto lx = ou_discrete_law(spec, x), ly = ou_discrete_law(spec, y);
        const double exact = renyi_gaussian_isotropic(Vector::Constant(1, lx.mean), Vector::Constant(1, ly.mean), lx.variance, q).value;
        const double bound = langevin_discrete_bound(kernel, N, q, SquaredDistance{(x - y) * (x - y)}).value;
        const double diff = std::abs(bound - exact);
        worst = std::max(worst, diff);
        const bool ok = diff <= 1e-12 * (1 + exact);
        const std::string id = "ou-" + std::to_string(i);
        s.table.rows.push_back(check_cells(id, bound, exact, 0, ok));
        if (!ok) s.failures.push_back(id);
    }
    s.summary = "max |bound - exact| = " + format_double(worst);
    return s;
}

Suite verify_shifts(const Context& ctx) {
    const auto& p = ctx.params;
    const std::int64_t N = p.integer("N", 20);
    const double L = p.num("L", 0.9);
    require(N >= 1, "--N must be positive");
    Suite s{{kCheckHeader, {}}, {}, {}};
    double worst = 0;
    for (std::int64_t n = 1; n <= N; ++n) {
        const double closed = optimal_shifts_closed_form(n, L).objective;
        const double dp = dp_oracle_optimize(n, L).objective;
        const double diff = std::abs(closed - dp);
        worst = std::max(worst, diff / std::max(1.0, std::abs(dp)));
        const bool ok = diff <= 1e-10 * std::max(1.0, std::abs(dp));
        const std::string id = "shifts-N" + std::to_string(n);
        s.table.rows.push_back(check_cells(id, closed, dp, 0, ok));
        if (!ok) s.failures.push_back(id);
    }
    s.summary = "max relative |closed - dp| = " + format_double(worst);
    return s;
}

Suite verify_sweep_h(const Context& ctx) {
    const auto& p = ctx.params;
    const double alpha = p.num("alpha", 1), T = p.num("T", 1), h0 = p.num("h", 0.1);
    const std::int64_t halvings = p.integer("halvings", 6);
    const RenyiOrder q = p.order("q", 2);
    require(halvings >= 1, "--halvings must be positive");
    const double steps0 = T / h0;
    require(std::abs(steps0 - std::round(steps0)) < 1e-9 * steps0 && steps0 >= 1, "T / h must be a positive integer");
    const double exact = ou_renyi_constant(OUSpec::continuous(alpha, T), q, OUMode::continuous);
    Suite s{{{"h", "N", "constant", "exact", "gap"}, {}}, {}, {}};
    double prev_gap = 0;
    std::string ratios;
    for (std::int64_t k = 0; k <= halvings; ++k) {
        const std::int64_t N = std::llround(steps0) << k;
        const double h = T / static_cast<double>(N);
        const double c = langevin_discrete_bound(KernelSpec::langevin_euler(alpha, alpha, h), N, q, SquaredDistance{1}).value;
        const double gap = c - exact;
        s.table.rows.push_back({json_number(h), std::to_string(N), json_number(c), json_number(exact), json_number(gap)});
        if (k > 0) {
            const double ratio = gap / prev_gap;
            ratios += (k > 1 ? " " : "") + format_double(ratio);
            if (!(ratio >= 0.4 && ratio <= 0.6)) s.failures.push_back("halving-" + std::to_string(k));
        }
        prev_gap = gap;
    }
    s.summary = "gap ratios: " + ratios;
    return s;
}

Suite verify_harnack(const Context& ctx) {
    const auto& p = ctx.params;
    const double alpha = p.num("alpha", 1), T = p.num("T", 1), pw = p.num("p", 2);
    const std::int64_t cases = p.integer("cases", 20);
    require(pw > 1, "--p must exceed 1");
    require(cases >= 1, "--cases must be positive");
    const auto spec = OUSpec::continuous(alpha, T);
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> ux(-2, 2), uc(-1, 1), ulo(0.05, 0.5);
    Suite s{{kCheckHeader, {}}, {}, {}};
    double worst = 0;
    const auto add = [&](const std::string& id, const harnack::CheckResult& r, bool ok) {
        s.table.rows.push_back(check_cells(id, r.lhs, r.rhs, r.se, ok));
        if (!ok) s.failures.push_back(id);
    };
    for (std::int64_t i = 0; i < cases; ++i) {
        const double x = ux(rng), y = ux(rng);
        const auto out = harnack::ou_outputs(spec, OUMode::continuous, x, y);
        const SquaredDistance d2{(x - y) * (x - y)};
        const auto cp = harnack::power_harnack_constant(langevin_continuous_bound(alpha, T, RenyiOrder::of(pw / (pw - 1)), d2), pw);
        const auto cl = harnack::log_harnack_constant(langevin_continuous_bound(alpha, T, RenyiOrder::kl(), d2));
        const auto rp = harnack::check_power_harnack(out, harnack::power_extremizer(out, pw), cp);
        const auto rl = harnack::check_log_harnack(out, harnack::log_extremizer(out), cl);
        const double lgap = std::abs(rl.gap) / std::max(1.0, std::abs(rl.rhs));
        worst = std::max({worst, std::abs(rp.rel_gap()), lgap});
        const std::string n = std::to_string(i);
        add("power-extremal-" + n, rp, rp.holds && std::abs(rp.rel_gap()) <= 1e-9);
        add("log-extremal-" + n, rl, rl.holds && lgap <= 1e-9);
        const double lo = ulo(rng);
        const auto f = harnack::TestFunction::quadratic_clipped(1 + uc(rng), uc(rng), uc(rng), lo, lo + 2);
        const auto fp = harnack::check_power_harnack(out, f, cp);
        const auto fl = harnack::check_log_harnack(out, f, cl);
        add("power-random-" + n, fp, fp.holds);
        add("log-random-" + n, fl, fl.holds);
    }
    s.summary = "max extremal relative gap = " + format_double(worst);
    return s;
}

Suite verify_clt(const Context&) {
    Suite s{{kCheckHeader, {}}, {}, {}};
    const auto add = [&](const std::string& id, double lhs, double rhs, bool ok) {
        s.table.rows.push_back(check_cells(id, lhs, rhs, 0, ok));
        if (!ok) s.failures.push_back(id);
    };
    const auto g = clt::clt_regularity(clt::DensitySpec::gaussian(1.0), 0, 1);
    add("gaussian-bound-vs-kl", g.bound.value, 0.5, std::abs(g.bound.value - 0.5) <= 1e-9);
    const auto logistic = clt::DensitySpec::logistic(1);
    const auto cr = clt::cramer_rao_check(logistic);
    add("logistic-fisher", cr.fisher, 1.0 / 3, std::abs(cr.fisher - 1.0 / 3) <= 1e-6);
    add("logistic-cramer-rao", cr.fisher, cr.inv_variance, cr.holds && cr.fisher > cr.inv_variance);
    const double target = clt::clt_regularity(logistic, 0, 1).bound.value;
    double prev = kInf;
    for (int N : {4, 16, 64, 256}) {
        const double chain = N * clt::one_step_convolution_kl(logistic, 1.0 / N, 1 / std::sqrt(double(N)));
        const double gap = std::abs(chain - target);
        add("logistic-chain-N" + std::to_string(N), chain, target, gap < prev);
        prev = gap;
    }
    s.summary = "logistic Fisher = " + format_double(cr.fisher);
    return s;
}

int cmd_verify(Context& ctx, const std::string& suite) {
    Suite s;
    if (suite == "ou")
        s = verify_ou(ctx);
    else if (suite == "shifts")
        s = verify_shifts(ctx);
    else if (suite == "sweep-h")
        s = verify_sweep_h(ctx);
    else if (suite == "harnack-check")
        s = verify_harnack(ctx);
    else if (suite == "clt-check")
        s = verify_clt(ctx);
    else
        throw ConfigError("unknown verify suite '" + suite + "'");
    emit(ctx, s.table, "csv");
    if (s.failures.empty()) {
        *ctx.err << "PASS " << suite << ": " << s.summary << "\n";
        return kOk;
    }
    *ctx.err << "FAIL " << suite << ": " << s.summary << "\nfailing cases:";
    for (const auto& f : s.failures) *ctx.err << " " << f;
    *ctx.err << "\n";
    return kFailure;
}

// simulate

sim::PotentialSpec make_potential(const Params& p) {
    const std::string kind = p.str("potential", "quadratic");
    if (kind == "quadratic") return sim::PotentialSpec::quadratic(p.num("a", 1));
    if (kind == "trig") return sim::PotentialSpec::trig_perturbed(p.num("eps", 0.3));
    throw ConfigError("--potential must be quadratic or trig");
}

int cmd_simulate(Context& ctx) {
    const auto& p = ctx.params;
    const auto pot = make_potential(p);
    const std::string coupling = p.str("coupling", "sync");
    sim::SimOptions opts;
    opts.seed = ctx.seed;
    opts.threads = ctx.threads;
    opts.n_paths = p.integer("n_paths", 1000);
    require(opts.n_paths >= 1, "--n_paths must be positive");
    const double x = p.num("x", 1), y = p.num("y", 0);
    sim::TrajectoryBatch b;
    if (coupling == "sync" || coupling == "wasserstein") {
        const double h = p.num("h", 0.1);
        const std::int64_t N = p.integer("N", 10);
        require(h > 0, "--h must be positive");
        require(N >= 1, "--N must be positive");
        const auto etas = optimal_shifts_closed_form(N, pot.lipschitz(h)).etas;
        b = coupling == "sync" ? sim::synchronous_shifted_pair(pot, h, N, Vector::Constant(1, x), Vector::Constant(1, y), etas, opts)
                               : sim::wasserstein_shifted_pair_1d(pot, h, N, x, y, etas, opts);
    } else if (coupling == "continuous") {
        b = sim::continuous_coupled_pair(pot, p.num("T", 1), p.integer("grid", 100), Vector::Constant(1, x),
                                         Vector::Constant(1, y), opts);
    } else {
        throw ConfigError("--coupling must be sync, wasserstein or continuous");
    }
    Table t{{"step", "mean_dist", "max_dist", "envelope", "cum_cost"}, {}};
    for (const auto& st : b.summary)
        t.rows.push_back({std::to_string(st.step), json_number(st.mean_dist), json_number(st.max_dist),
                          json_number(st.envelope), json_number(st.cum_cost)});
    emit(ctx, t, "csv");
    return kOk;
}

// harnack

harnack::TestFunction make_test_function(const Params& p, const harnack::KernelOutputs& out, const std::string& kind,
                                         double pw) {
    const std::string f = p.str("f", "quadratic");
    if (f == "extremal") {
        const auto* g = std::get_if<harnack::GaussianOutputs>(&out);
        require(g != nullptr, "--f extremal needs the OU kernel");
        if (kind == "power") return harnack::power_extremizer(*g, pw);
        if (kind == "log") return harnack::log_extremizer(*g);
        return harnack::reverse_extremizer(*g, pw);
    }
    if (f == "linear") return harnack::TestFunction::linear(p.num("fa", 1), p.num("fb", 0));
    if (f == "quadratic")
        return harnack::TestFunction::quadratic_clipped(p.num("fa", 1), p.num("fb", 0.5), p.num("fc", -0.25), p.num("lo", 0.1),
                                                        p.num("hi", 2));
    if (f == "exp") return harnack::TestFunction::exp_affine(p.num("fa", 1), p.num("fb", 0));
    if (f == "indicator") return harnack::TestFunction::indicator_halfspace(p.num("fa", 0));
    throw ConfigError("--f must be extremal, linear, quadratic, exp or indicator");
}

int cmd_harnack(Context& ctx) {
    const auto& p = ctx.params;
    const std::string kind = p.str("kind", "power");
    require(kind == "power" || kind == "log" || kind == "reverse", "--kind must be power, log or reverse");
    const double pw = p.num("p", kind == "reverse" ? -1.0 : 2.0);
    if (kind == "power") require(pw > 1, "--p must exceed 1 for the power inequality");
    if (kind == "reverse") require(pw < 0, "--p must be negative for the reverse inequality");
    const RenyiOrder q = kind == "log" ? RenyiOrder::kl() : RenyiOrder::of(pw / (pw - 1));
    const double x = p.num("x", 1), y = p.num("y", 0);
    const SquaredDistance d2{(x - y) * (x - y)};
    const std::string potential = p.str("potential", "ou");
    harnack::KernelOutputs out = harnack::SampleOutputs{};
    BoundReport bound;
    if (potential == "ou") {
        const double alpha = p.num("alpha", 1), T = p.num("T", 1);
        out = harnack::ou_outputs(OUSpec::continuous(alpha, T), OUMode::continuous, x, y);
        bound = langevin_continuous_bound(alpha, T, q, d2);
    } else if (potential == "trig") {
        const auto pot = sim::PotentialSpec::trig_perturbed(p.num("eps", 0.3));
        const double h = p.num("h", 0.1);
        const std::int64_t N = p.integer("N", 10), n = p.integer("n_paths", 100000);
        require(n >= 2, "--n_paths must be at least 2");
        out = harnack::sample_outputs(pot, h, N, x, y, ctx.seed, n);
        bound = langevin_discrete_bound(KernelSpec::langevin_euler(pot.alpha(), pot.beta(), h), N, q, d2);
    } else {
        throw ConfigError("--potential must be ou or trig");
    }
    const auto f = make_test_function(p, out, kind, pw);
    harnack::CheckResult r;
    if (kind == "power")
        r = harnack::check_power_harnack(out, f, harnack::power_harnack_constant(bound, pw));
    else if (kind == "log")
        r = harnack::check_log_harnack(out, f, harnack::log_harnack_constant(bound));
    else
        r = harnack::check_reverse_harnack(out, f, harnack::reverse_harnack_constant(bound, pw));
    Table t{kCheckHeader, {check_cells(r.inequality, r.lhs, r.rhs, r.se, r.holds)}};
    emit(ctx, t, "json");
    return r.holds ? kOk : kFailure;
}

// clt

int cmd_clt(Context& ctx) {
    const auto& p = ctx.params;
    const std::string d = p.str("density", "logistic");
    require(d == "gaussian" || d == "logistic", "--density must be gaussian or logistic");
    const auto rho = d == "gaussian" ? clt::DensitySpec::gaussian(p.num("param", 1)) : clt::DensitySpec::logistic(p.num("param", 1));
    const double x = p.num("x", 0), y = p.num("y", 1);
    const auto cr = clt::cramer_rao_check(rho);
    const auto rep = clt::clt_regularity(rho, x, y);
    std::vector<std::string> header{"fisher", "inv_variance", "cramer_rao_holds", "bound", "covariance_value"};
    std::vector<std::string> row{json_number(cr.fisher), json_number(cr.inv_variance), json_bool(cr.holds),
                                 json_number(rep.bound.value), json_number(rep.covariance_value)};
    if (p.has("N")) {
        const std::int64_t N = p.integer("N");
        require(N >= 1, "--N must be positive");
        const double n = static_cast<double>(N);
        header.push_back("convolution_kl");
        row.push_back(json_number(n * clt::one_step_convolution_kl(rho, (y - x) / n, 1 / std::sqrt(n))));
    }
    const std::string fmt = ctx.format.empty() ? "json" : ctx.format;
    if (fmt == "csv") {
        Table{header, {row}}.write_csv(*ctx.out);
    } else {
        *ctx.out << "{";
        for (std::size_t i = 0; i < header.size(); ++i) {
            *ctx.out << (i ? ", " : "") << json_string(header[i]) << ": ";
            *ctx.out << (header[i] == "bound" ? to_json(rep.bound) : row[i]);
        }
        *ctx.out << "}\n";
    }
    return kOk;
}

const std::vector<std::string> kCommon{"output", "format", "seed", "threads"};

const std::map<std::string, std::vector<std::string>> kOptions{
    {"bound", {"alpha", "beta", "h", "N", "T", "q", "sqdist", "c", "L", "lambda", "Lambda", "q0", "q1", "C", "density",
               "param", "x", "y"}},
    {"verify", {"alpha", "h", "N", "T", "q", "p", "L", "halvings", "cases"}},
    {"simulate", {"potential", "a", "eps", "coupling", "h", "N", "T", "grid", "x", "y", "n_paths"}},
    {"harnack", {"kind", "p", "potential", "alpha", "T", "eps", "h", "N", "n_paths", "x", "y", "f", "fa", "fb", "fc", "lo", "hi"}},
    {"clt", {"density", "param", "x", "y", "N"}},
};

std::string config_value(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) return format_double(v.get<double>());
    throw ConfigError("config key '" + key + "' must be a scalar");
}

std::uint64_t parse_seed(const std::string& s, const std::string& source) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        if (!s.empty() && s[0] != '-') v = std::stoull(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (s.empty() || pos != s.size()) throw ConfigError(source + " expects a nonnegative integer seed, got '" + s + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_json(const BoundReport& r) {
    const auto c = bound_cells(r);
    std::string s = "{";
    for (std::size_t i = 0; i < kBoundHeader.size(); ++i) s += (i ? ", " : "") + json_string(kBoundHeader[i]) + ": " + c[i];
    return s + "}";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Divergence regularity bounds, couplings and Harnack checks", "shiftbound"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, CLI::Option*>> opts;
    std::string positional;
    for (const auto& [name, names] : kOptions) {
        auto* sub = app.add_subcommand(name);
        sub->set_help_flag("--help", "Print this help message and exit");
        sub->add_option("--config", config_path, "JSON file of parameters; flags take precedence");
        if (name == "bound")
            sub->add_option("kind", positional, "multi-step, langevin-discrete, langevin-continuous, mult-noise, clt, compose-orders")->required();
        if (name == "verify")
            sub->add_option("suite", positional, "ou, shifts, sweep-h, harnack-check, clt-check")->required();
        auto& vals = values[name];
        for (const auto* list : {&kCommon, &names})
            for (const auto& o : *list) opts[name][o] = sub->add_option("--" + o, vals[o]);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    std::ofstream file;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config file '" + config_path + "'");
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("invalid config file: " + std::string(e.what()));
            }
            if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
            for (const auto& [k, v] : j.items()) {
                if (!opts[command].count(k)) throw ConfigError("unknown config key '" + k + "' for " + command);
                ctx.params.raw[k] = config_value(v, k);
            }
        }
        for (const auto& [k, o] : opts[command])
            if (o->count() > 0) ctx.params.raw[k] = values[command][k];

        const char* env = std::getenv("SHIFTBOUND_SEED");
        if (ctx.params.has("seed"))
            ctx.seed = parse_seed(ctx.params.str("seed"), "--seed");
        else if (env != nullptr)
            ctx.seed = parse_seed(env, "SHIFTBOUND_SEED");
        ctx.threads = static_cast<int>(ctx.params.integer("threads", 1));
        require(ctx.threads >= 0, "--threads must be nonnegative");
        ctx.format = ctx.params.str("format", "");
        require(ctx.format.empty() || ctx.format == "json" || ctx.format == "csv", "--format must be json or csv");
        if (ctx.params.has("output")) {
            file.open(ctx.params.str("output"));
            if (!file) throw ConfigError("cannot open output file '" + ctx.params.str("output") + "'");
            ctx.out = &file;
        }

        if (command == "bound") return cmd_bound(ctx, positional);
        if (command == "verify") return cmd_verify(ctx, positional);
        if (command == "simulate") return cmd_simulate(ctx);
        if (command == "harnack") return cmd_harnack(ctx);
        return cmd_clt(ctx);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const sim::SimulationError& e) {
        err << "error: simulation failed: " << e.what() << "\n";
        return kFailure;
    } catch (const clt::IntegrationError& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }
}

}  // namespace shiftbound::cli
