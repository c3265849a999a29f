#pragma once

#include "shiftbound/divergence.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace shiftbound::sim {

inline constexpr std::uint64_t kDefaultSeed = 20240517;

using Gradient = std::function<void(const Vector& x, Vector& grad)>;

// V with alpha I <= Hess V <= beta I.
class PotentialSpec {
public:
    enum class Kind { quadratic, trig_perturbed, custom };

    // V(x) = a |x|^2 / 2.
    static PotentialSpec quadratic(double a, int dim = 1);
    // V(x) = |x|^2 / 2 + eps sum cos(x_i).
    static PotentialSpec trig_perturbed(double eps, int dim = 1);
    static PotentialSpec custom(Gradient grad, double alpha, double beta, int dim = 1);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double parameter() const { return param_; }

    void gradient(const Vector& x, Vector& out) const;

    // Lipschitz constant of x -> x - h grad V(x).
    double lipschitz(double h) const;

private:
    Kind kind_ = Kind::quadratic;
    int dim_ = 1;
    double alpha_ = 1.0;
    double beta_ = 1.0;
    double param_ = 1.0;
    Gradient grad_;
};

// Euler discretization of dX = b(t, X) dt + sigma(t, X) dB.
struct ItoSpec {
    std::function<void(double t, const Vector& x, Vector& drift)> drift;
    std::function<void(double t, const Vector& x, Matrix& sigma)> diffusion;
    int dim = 1;
};

// Isotropic Gaussian initial law.
struct InitLaw {
    Vector mean;
    double variance;
};

using Init = std::variant<Vector, InitLaw>;

struct SimOptions {
    std::uint64_t seed = kDefaultSeed;
    std::int64_t n_paths = 1;
    // 0 picks the hardware concurrency; results do not depend on it.
    int threads = 1;
    bool record_states = false;
};

struct StepSummary {
    std::int64_t step = 0;
    double time = 0.0;
    double mean_dist = 0.0;
    double max_dist = 0.0;
    double envelope = 0.0;
    double cum_cost = 0.0;
    // Root mean squared coupled distance.
    double w2 = 0.0;
};

struct TrajectoryBatch {
    std::uint64_t seed = 0;
    std::int64_t n_paths = 0;
    std::int64_t steps = 0;
    // states[path][step], filled when record_states is set.
    std::vector<std::vector<Vector>> states;
    std::vector<Vector> final_states;
    // Terminal states of the shifted partner, for coupled runs.
    std::vector<Vector> final_partner;
    // One entry per step 0..steps, for coupled runs.
    std::vector<StepSummary> summary;
    // Cumulative coupling cost per path, for coupled runs.
    std::vector<double> path_cost;
};

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, std::int64_t step) : std::runtime_error(what), step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

// x <- x - h grad V(x) + sqrt(2h) xi.
TrajectoryBatch euler_maruyama(const PotentialSpec& potential, double h, std::int64_t steps, const Init& init,
                               const SimOptions& opts);

TrajectoryBatch ito_euler_maruyama(const ItoSpec& spec, double h, std::int64_t steps, const Vector& x,
                                   const SimOptions& opts);

// X from x and X' from y with shared noise; X' steps from X' + eta_n (X - X').
// cum_cost accumulates |m(X~) - m(X')|^2 / (4h) with m(z) = z - h grad V(z).
TrajectoryBatch synchronous_shifted_pair(const PotentialSpec& potential, double h, std::int64_t N, const Vector& x,
                                         const Vector& y, const std::vector<double>& etas, const SimOptions& opts);

// As above but the shift uses the sorted-rank matching of the two empirical laws at each step.
// max_dist is the empirical W_inf estimate and w2 the empirical W_2 estimate.
TrajectoryBatch wasserstein_shifted_pair_1d(const PotentialSpec& potential, double h, std::int64_t N, double x,
                                            double y, const std::vector<double>& etas, const SimOptions& opts);

// Shifted diffusion started at x driven toward the diffusion started at y with the optimal
// continuous schedule. cum_cost accumulates int eta_t^2 |X_t - Y_t|^2 / 4 dt.
TrajectoryBatch continuous_coupled_pair(const PotentialSpec& potential, double T, std::int64_t grid_steps,
                                        const Vector& x, const Vector& y, const SimOptions& opts);

}  // namespace shiftbound::sim
