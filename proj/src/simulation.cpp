#include "shiftbound/simulation.hpp"

#include "shiftbound/detail/summation.hpp"
#include "shiftbound/rng.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

namespace shiftbound::sim {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::int64_t kBlock = 512;

// Gauss-Legendre 8-point rule on [0, 1].
constexpr double kGLNodes[8] = {0.019855071751231856, 0.10166676129318664, 0.23723379504183550, 0.40828267875217510,
                                0.59171732124782490,  0.76276620495816450, 0.89833323870681340, 0.98014492824876810};
constexpr double kGLWeights[8] = {0.050614268145188130, 0.11119051722668724, 0.15685332293894364, 0.18134189168918100,
                                  0.18134189168918100,  0.15685332293894364, 0.11119051722668724, 0.050614268145188130};

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs f(block, begin, end) over fixed-size path blocks; the partition does not depend on threads.
template <class F>
void for_blocks(std::int64_t n, int threads, F&& f) {
    const std::int64_t blocks = (n + kBlock - 1) / kBlock;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(blocks));
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t b = next++; b < blocks; b = next++) {
            try {
                f(b, b * kBlock, std::min(n, (b + 1) * kBlock));
            } catch (...) {
                errors[static_cast<std::size_t>(b)] = std::current_exception();
            }
        }
    };
    const int t = std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(blocks, 1));
    if (t <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < t; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

// Per-block, per-step accumulators for coupled runs.
struct StepAcc {
    std::vector<detail::CompensatedSum> dist, dist2, cost;
    std::vector<double> max_dist;

    explicit StepAcc(std::size_t steps) : dist(steps), dist2(steps), cost(steps), max_dist(steps, 0.0) {}

    void add(std::size_t k, double d, double c) {
        dist[k].add(d);
        dist2[k].add(d * d);
        cost[k].add(c);
        max_dist[k] = std::max(max_dist[k], d);
    }
};

std::vector<StepSummary> merge(const std::vector<StepAcc>& accs, std::int64_t n_paths, const std::vector<double>& times,
                               const std::vector<double>& envelope) {
    std::vector<StepSummary> out(times.size());
    const double n = static_cast<double>(n_paths);
    for (std::size_t k = 0; k < times.size(); ++k) {
        detail::CompensatedSum d, d2, c;
        double mx = 0.0;
        for (const auto& a : accs) {
            d.add(a.dist[k].value());
            d2.add(a.dist2[k].value());
            c.add(a.cost[k].value());
            mx = std::max(mx, a.max_dist[k]);
        }
        out[k] = {static_cast<std::int64_t>(k), times[k], d.value() / n, mx, envelope[k], c.value() / n,
                  std::sqrt(d2.value() / n)};
    }
    return out;
}

void check_options(const SimOptions& opts) {
    if (opts.n_paths < 1) throw std::invalid_argument("n_paths must be positive");
}

void check_finite(const Vector& v, std::int64_t step, const char* what) {
    if (!v.allFinite()) throw SimulationError(std::string("non-finite ") + what + " at step " + std::to_string(step), step);
}

void fill_noise(const rng::CounterRng& g, std::int64_t step, Vector& xi) {
    const auto d = static_cast<std::uint64_t>(xi.size());
    for (Eigen::Index i = 0; i < xi.size(); ++i)
        xi[i] = g.normal(static_cast<std::uint64_t>(step) * d + static_cast<std::uint64_t>(i));
}

void check_schedule(const std::vector<double>& etas, std::int64_t N) {
    if (static_cast<std::int64_t>(etas.size()) != N) throw std::invalid_argument("schedule length must equal N");
    if (N < 1 || etas.back() != 1.0) throw std::invalid_argument("schedule must end with eta = 1");
    for (double e : etas)
        if (!(e >= 0)) throw std::invalid_argument("shifts must be nonnegative");
}

std::vector<double> shift_envelope(double L, const std::vector<double>& etas, double d0) {
    std::vector<double> env{d0};
    for (double e : etas) env.push_back(env.back() * L * std::abs(1.0 - e));
    return env;
}

TrajectoryBatch make_batch(const SimOptions& opts, std::int64_t steps) {
    TrajectoryBatch b;
    b.seed = opts.seed;
    b.n_paths = opts.n_paths;
    b.steps = steps;
    b.final_states.resize(static_cast<std::size_t>(opts.n_paths));
    if (opts.record_states) b.states.resize(static_cast<std::size_t>(opts.n_paths));
    return b;
}

// exp(-(I(t) - I(t0))) for the optimal continuous schedule.
double schedule_decay(double alpha, double T, double t0, double t) {
    if (std::abs(alpha * T) < 1e-12) return (T - t) / (T - t0);
    return std::expm1(-2.0 * alpha * (T - t)) / std::expm1(-2.0 * alpha * (T - t0));
}

}  // namespace

PotentialSpec PotentialSpec::quadratic(double a, int dim) {
    if (!(a > 0)) throw std::invalid_argument("quadratic coefficient must be positive");
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    PotentialSpec p;
    p.kind_ = Kind::quadratic;
    p.dim_ = dim;
    p.alpha_ = p.beta_ = p.param_ = a;
    return p;
}

PotentialSpec PotentialSpec::trig_perturbed(double eps, int dim) {
    if (!(std::abs(eps) < 1)) throw std::invalid_argument("epsilon must lie in (-1, 1)");
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    PotentialSpec p;
    p.kind_ = Kind::trig_perturbed;
    p.dim_ = dim;
    p.param_ = eps;
    p.alpha_ = 1.0 - std::abs(eps);
    p.beta_ = 1.0 + std::abs(eps);
    return p;
}

PotentialSpec PotentialSpec::custom(Gradient grad, double alpha, double beta, int dim) {
    if (!grad) throw std::invalid_argument("gradient callable is empty");
    if (!(beta >= alpha)) throw std::invalid_argument("beta must be at least alpha");
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    PotentialSpec p;
    p.kind_ = Kind::custom;
    p.dim_ = dim;
    p.alpha_ = alpha;
    p.beta_ = beta;
    p.grad_ = std::move(grad);
    return p;
}

void PotentialSpec::gradient(const Vector& x, Vector& out) const {
    switch (kind_) {
    case Kind::quadratic:
        out = param_ * x;
        break;
    case Kind::trig_perturbed:
        out = x - param_ * x.array().sin().matrix();
        break;
    case Kind::custom:
        grad_(x, out);
        break;
    }
}

double PotentialSpec::lipschitz(double h) const { return std::max(std::abs(1.0 - h * alpha_), std::abs(1.0 - h * beta_)); }

TrajectoryBatch euler_maruyama(const PotentialSpec& potential, double h, std::int64_t steps, const Init& init,
                               const SimOptions& opts) {
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
    check_options(opts);
    const int dim = potential.dim();
    if (const auto* v = std::get_if<Vector>(&init); v && v->size() != dim) throw std::invalid_argument("init dimension mismatch");
    if (const auto* g = std::get_if<InitLaw>(&init); g && (g->mean.size() != dim || !(g->variance >= 0)))
        throw std::invalid_argument("invalid initial law");
    auto batch = make_batch(opts, steps);
    const double s = std::sqrt(2.0 * h);
    for_blocks(opts.n_paths, opts.threads, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        Vector x(dim), g(dim), xi(dim);
        for (std::int64_t p = begin; p < end; ++p) {
            const rng::CounterRng noise(opts.seed, kNoiseStream, static_cast<std::uint64_t>(p));
            if (const auto* v = std::get_if<Vector>(&init)) {
                x = *v;
            } else {
                const auto& law = std::get<InitLaw>(init);
                const rng::CounterRng r(opts.seed, kInitStream, static_cast<std::uint64_t>(p));
                for (int i = 0; i < dim; ++i) x[i] = law.mean[i] + std::sqrt(law.variance) * r.normal(static_cast<std::uint64_t>(i));
            }
            auto* rec = opts.record_states ? &batch.states[static_cast<std::size_t>(p)] : nullptr;
            if (rec) rec->push_back(x);
            for (std::int64_t n = 0; n < steps; ++n) {
                potential.gradient(x, g);
                check_finite(g, n, "gradient");
                fill_noise(noise, n, xi);
                x += -h * g + s * xi;
                check_finite(x, n + 1, "state");
                if (rec) rec->push_back(x);
            }
            batch.final_states[static_cast<std::size_t>(p)] = x;
        }
    });
    return batch;
}

TrajectoryBatch ito_euler_maruyama(const ItoSpec& spec, double h, std::int64_t steps, const Vector& x0,
                                   const SimOptions& opts) {
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    if (steps < 0) throw std::invalid_argument("steps must be nonnegative");
    if (!spec.drift || !spec.diffusion) throw std::invalid_argument("Ito coefficients are missing");
    if (x0.size() != spec.dim) throw std::invalid_argument("init dimension mismatch");
    check_options(opts);
    auto batch = make_batch(opts, steps);
    const double s = std::sqrt(h);
    for_blocks(opts.n_paths, opts.threads, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
        Vector x(spec.dim), b(spec.dim), xi(spec.dim);
        Matrix sigma(spec.dim, spec.dim);
        for (std::int64_t p = begin; p < end; ++p) {
            const rng::CounterRng noise(opts.seed, kNoiseStream, static_cast<std::uint64_t>(p));
            x = x0;
            auto* rec = opts.record_states ? &batch.states[static_cast<std::size_t>(p)] : nullptr;
            if (rec) rec->push_back(x);
            for (std::int64_t n = 0; n < steps; ++n) {
                const double t = static_cast<double>(n) * h;
                spec.drift(t, x, b);
                spec.diffusion(t, x, sigma);
                check_finite(b, n, "drift");
                fill_noise(noise, n, xi);
                x += h * b + s * (sigma * xi);
                check_finite(x, n + 1, "state");
                if (rec) rec->push_back(x);
            }
            batch.final_states[static_cast<std::size_t>(p)] = x;
        }
    });
    return batch;
}

TrajectoryBatch synchronous_shifted_pair(const PotentialSpec& potential, double h, std::int64_t N, const Vector& x,
                                         const Vector& y, const std::vector<double>& etas, const SimOptions& opts) {
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    check_schedule(etas, N);
    check_options(opts);
    const int dim = potential.dim();
    if (x.size() != dim || y.size() != dim) throw std::invalid_argument("init dimension mismatch");
    auto batch = make_batch(opts, N);
    batch.final_partner.resize(static_cast<std::size_t>(opts.n_paths));
    batch.path_cost.resize(static_cast<std::size_t>(opts.n_paths));
    const auto steps = static_cast<std::size_t>(N + 1);
    const std::int64_t blocks = (opts.n_paths + kBlock - 1) / kBlock;
    std::vector<StepAcc> accs(static_cast<std::size_t>(blocks), StepAcc(steps));
    const double s = std::sqrt(2.0 * h);
    for_blocks(opts.n_paths, opts.threads, [&](std::int64_t blk, std::int64_t begin, std::int64_t end) {
        auto& acc = accs[static_cast<std::size_t>(blk)];
        Vector X(dim), Xp(dim), Xt(dim), g(dim), mX(dim), mXt(dim), mXp(dim), xi(dim);
        for (std::int64_t p = begin; p < end; ++p) {
            const rng::CounterRng noise(opts.seed, kNoiseStream, static_cast<std::uint64_t>(p));
            X = x;
            Xp = y;
            double cost = 0.0;
            acc.add(0, (X - Xp).norm(), 0.0);
            auto* rec = opts.record_states ? &batch.states[static_cast<std::size_t>(p)] : nullptr;
            if (rec) rec->push_back(X);
            for (std::int64_t n = 0; n < N; ++n) {
                const double eta = etas[static_cast<std::size_t>(n)];
                if (eta == 1.0)
                    Xt = X;
                else
                    Xt = Xp + eta * (X - Xp);
                potential.gradient(X, g);
                check_finite(g, n, "gradient");
                mX = X - h * g;
                potential.gradient(Xt, g);
                check_finite(g, n, "gradient");
                mXt = Xt - h * g;
                potential.gradient(Xp, g);
                check_finite(g, n, "gradient");
                mXp = Xp - h * g;
                cost += (mXt - mXp).squaredNorm() / (4.0 * h);
                fill_noise(noise, n, xi);
                X = mX + s * xi;
                Xp = mXt + s * xi;
                check_finite(X, n + 1, "state");
                check_finite(Xp, n + 1, "state");
                acc.add(static_cast<std::size_t>(n + 1), (X - Xp).norm(), cost);
                if (rec) rec->push_back(X);
            }
            batch.final_states[static_cast<std::size_t>(p)] = X;
            batch.final_partner[static_cast<std::size_t>(p)] = Xp;
            batch.path_cost[static_cast<std::size_t>(p)] = cost;
        }
    });
    std::vector<double> times(steps);
    for (std::size_t k = 0; k < steps; ++k) times[k] = static_cast<double>(k) * h;
    batch.summary = merge(accs, opts.n_paths, times, shift_envelope(potential.lipschitz(h), etas, (x - y).norm()));
    return batch;
}

TrajectoryBatch wasserstein_shifted_pair_1d(const PotentialSpec& potential, double h, std::int64_t N, double x, double y,
                                            const std::vector<double>& etas, const SimOptions& opts) {
    if (potential.dim() != 1) throw std::invalid_argument("Wasserstein coupling is only implemented in dimension 1");
    if (!(h > 0)) throw std::invalid_argument("step size must be positive");
    check_schedule(etas, N);
    check_options(opts);
    const auto n = static_cast<std::size_t>(opts.n_paths);
    auto batch = make_batch(opts, N);
    batch.final_partner.resize(n);
    batch.path_cost.assign(n, 0.0);
    std::vector<double> X(n, x), Xp(n, y);
    const auto steps = static_cast<std::size_t>(N + 1);
    StepAcc acc(steps);
    const double s = std::sqrt(2.0 * h);
    Vector z(1), g(1);
    auto drift_map = [&](double v, std::int64_t step) {
        z[0] = v;
        potential.gradient(z, g);
        check_finite(g, step, "gradient");
        return v - h * g[0];
    };
    auto record = [&](std::size_t k) {
        std::sort(X.begin(), X.end());
        std::sort(Xp.begin(), Xp.end());
        for (std::size_t i = 0; i < n; ++i) acc.add(k, std::abs(X[i] - Xp[i]), batch.path_cost[i]);
        if (opts.record_states)
            for (std::size_t i = 0; i < n; ++i) batch.states[i].push_back(Vector::Constant(1, X[i]));
    };
    record(0);
    for (std::int64_t k = 0; k < N; ++k) {
        const double eta = etas[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < n; ++i) {
            const double xt = eta == 1.0 ? X[i] : Xp[i] + eta * (X[i] - Xp[i]);
            const double mX = drift_map(X[i], k), mXt = drift_map(xt, k), mXp = drift_map(Xp[i], k);
            batch.path_cost[i] += (mXt - mXp) * (mXt - mXp) / (4.0 * h);
            const double xi = rng::CounterRng(opts.seed, kNoiseStream, i).normal(static_cast<std::uint64_t>(k));
            X[i] = mX + s * xi;
            Xp[i] = mXt + s * xi;
            if (!std::isfinite(X[i]) || !std::isfinite(Xp[i]))
                throw SimulationError("non-finite state at step " + std::to_string(k + 1), k + 1);
        }
        record(static_cast<std::size_t>(k + 1));
    }
    for (std::size_t i = 0; i < n; ++i) {
        batch.final_states[i] = Vector::Constant(1, X[i]);
        batch.final_partner[i] = Vector::Constant(1, Xp[i]);
    }
    std::vector<double> times(steps);
    for (std::size_t k = 0; k < steps; ++k) times[k] = static_cast<double>(k) * h;
    batch.summary = merge({acc}, opts.n_paths, times, shift_envelope(potential.lipschitz(h), etas, std::abs(x - y)));
    return batch;
}

TrajectoryBatch continuous_coupled_pair(const PotentialSpec& potential, double T, std::int64_t grid_steps,
                                        const Vector& x, const Vector& y, const SimOptions& opts) {
    if (!(T > 0)) throw std::invalid_argument("T must be positive");
    if (grid_steps < 10) throw std::invalid_argument("grid_steps must be at least 10");
    check_options(opts);
    const int dim = potential.dim();
    if (x.size() != dim || y.size() != dim) throw std::invalid_argument("init dimension mismatch");
    const double alpha = potential.alpha();
    const double h = T / static_cast<double>(grid_steps);
    const auto M = static_cast<std::size_t>(grid_steps);

    // Per cell: contraction of the schedule, quadrature nodes and weights of eta^2 exp(-2 (I(t) - I(t_k))).
    std::vector<double> times(M + 1), decay(M), env(M + 1);
    std::vector<std::array<double, 8>> cw(M);
    for (std::size_t k = 0; k <= M; ++k) times[k] = k == M ? T : static_cast<double>(k) * h;
    const double d0 = (x - y).norm();
    env[0] = d0;
    for (std::size_t k = 0; k < M; ++k) {
        const double t0 = times[k];
        decay[k] = k + 1 == M ? 0.0 : schedule_decay(alpha, T, t0, times[k + 1]);
        for (int j = 0; j < 8; ++j) {
            const double t = t0 + kGLNodes[j] * h;
            const double eta = std::abs(alpha * T) < 1e-12 ? 1.0 / (T - t) : 2.0 * alpha / std::expm1(2.0 * alpha * (T - t));
            const double r = schedule_decay(alpha, T, t0, t);
            cw[k][static_cast<std::size_t>(j)] = kGLWeights[j] * h * eta * eta * r * r;
        }
        env[k + 1] = env[k] * std::exp(-alpha * h) * decay[k];
    }

    auto batch = make_batch(opts, grid_steps);
    batch.final_partner.resize(static_cast<std::size_t>(opts.n_paths));
    batch.path_cost.resize(static_cast<std::size_t>(opts.n_paths));
    const std::int64_t blocks = (opts.n_paths + kBlock - 1) / kBlock;
    std::vector<StepAcc> accs(static_cast<std::size_t>(blocks), StepAcc(M + 1));
    const double s = std::sqrt(2.0 * h);
    for_blocks(opts.n_paths, opts.threads, [&](std::int64_t blk, std::int64_t begin, std::int64_t end) {
        auto& acc = accs[static_cast<std::size_t>(blk)];
        Vector X(dim), Y(dim), D(dim), gx(dim), gy(dim), xi(dim);
        for (std::int64_t p = begin; p < end; ++p) {
            const rng::CounterRng noise(opts.seed, kNoiseStream, static_cast<std::uint64_t>(p));
            X = x;
            Y = y;
            D = X - Y;
            double cost = 0.0;
            acc.add(0, D.norm(), 0.0);
            auto* rec = opts.record_states ? &batch.states[static_cast<std::size_t>(p)] : nullptr;
            if (rec) rec->push_back(X);
            for (std::size_t k = 0; k < M; ++k) {
                const auto step = static_cast<std::int64_t>(k);
                potential.gradient(Y, gy);
                check_finite(gy, step, "gradient");
                const double d2 = D.squaredNorm();
                // The difference has no noise; integrate it with the secant slope of grad V frozen on the cell.
                double A = 0.0;
                if (d2 > 0) {
                    potential.gradient(X, gx);
                    check_finite(gx, step, "gradient");
                    A = (gx - gy).dot(D) / d2;
                    double J = 0.0;
                    for (std::size_t j = 0; j < 8; ++j) J += cw[k][j] * std::exp(-2.0 * A * kGLNodes[j] * h);
                    cost += 0.25 * d2 * J;
                }
                fill_noise(noise, step, xi);
                Y += -h * gy + s * xi;
                D *= std::exp(-A * h) * decay[k];
                X = Y + D;
                check_finite(X, step + 1, "state");
                acc.add(k + 1, D.norm(), cost);
                if (rec) rec->push_back(X);
            }
            batch.final_states[static_cast<std::size_t>(p)] = X;
            batch.final_partner[static_cast<std::size_t>(p)] = Y;
            batch.path_cost[static_cast<std::size_t>(p)] = cost;
        }
    });
    batch.summary = merge(accs, opts.n_paths, times, env);
    return batch;
}

}  // namespace shiftbound::sim
