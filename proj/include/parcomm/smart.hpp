#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace parcomm {

/// Single-node quantized dynamics. Action 0 is silent, action 1 transmit; the
/// solver adds the auxiliary cost m to every transmit.
struct MdpModel {
    Eigen::MatrixXd P0, P1;  // row-stochastic, n x n
    Eigen::VectorXd E0, E1;  // immediate costs

    std::size_t states() const { return static_cast<std::size_t>(E0.size()); }
    void validate() const;
};

struct MdpSolution {
    std::vector<bool> transmit;  // per state
    Eigen::VectorXd f;           // relative cost-to-go, f(0) = 0
    double J = 0.0;              // average cost per epoch
    double residual = 0.0;       // span of the Bellman residual
    int sweeps = 0;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Relative value iteration on the average-cost Bellman equation
///   J + f(x) = min_u { E_u(x) + m u + sum_y P_u(x, y) f(y) }.
/// Stops when successive iterates differ by less than `tol` in span seminorm.
/// Ties go to silent.
MdpSolution solve_decoupled_mdp(const MdpModel& model, double m, double tol = 1e-8, int max_sweeps = 100000);

/// Span of min_u{E_u + m u + P_u f} - f; zero for an exact solution.
double bellman_residual(const MdpModel& model, double m, const Eigen::VectorXd& f);

/// Largest m at which transmitting in `state` is still optimal (bisection on
/// [0, m_hi]). Returns 0 when silence is optimal even at m = 0.
double whittle_index(const MdpModel& model, std::size_t state, double m_hi, double tol = 1e-7);

struct AuxCostGrid {
    double m_min = 0.0;
    double m_max = 1.0;
    double m_int = 0.1;

    void validate() const;
    std::vector<double> points() const;
    /// Nearest grid point.
    double snap(double m) const;
    std::size_t index_of(double m) const;
};

struct PolicyBank {
    AuxCostGrid grid;
    std::uint64_t model_hash = 0;
    std::size_t states = 0;
    std::vector<double> m;                 // grid points in ascending order
    std::vector<MdpSolution> solutions;    // one per grid point

    const MdpSolution& policy_for(double m_value) const;
};

std::uint64_t model_hash(const MdpModel& model);

PolicyBank build_policy_bank(const AuxCostGrid& grid, const MdpModel& model);

/// Text format, see docs/formats.md.
void save_policy_bank(const PolicyBank& bank, const std::string& path);
PolicyBank load_policy_bank(const std::string& path);

/// Loads `<dir>/bank-<hash>.txt` when it matches the grid, else builds and
/// stores it. An empty `dir` disables the cache.
PolicyBank load_or_build_policy_bank(const AuxCostGrid& grid, const MdpModel& model, const std::string& dir);

/// Quantized prediction-error state. Grid points are ascending, the first is 0.
class ErrorGrid {
public:
    explicit ErrorGrid(std::vector<double> points);

    /// Index of the nearest grid point (ties go to the lower point).
    std::size_t project(double error) const;
    double value(std::size_t i) const { return points_[i]; }
    std::size_t size() const { return points_.size(); }
    const std::vector<double>& points() const { return points_; }

private:
    std::vector<double> points_;
};

/// Frequency counts of silent transitions between quantized error states.
class TransitionCounter {
public:
    explicit TransitionCounter(std::size_t states);

    void add(std::size_t from, std::size_t to);
    void merge(const TransitionCounter& other);
    std::uint64_t count(std::size_t from, std::size_t to) const;

    /// Silent dynamics from the counts; rows never observed move up one level
    /// or stay with equal odds. Transmitting resets to the zero-error row.
    /// Cost of a state is its grid value; a transmit pays the zero-error cost.
    MdpModel build(const ErrorGrid& grid) const;

private:
    std::size_t n_;
    std::vector<std::uint64_t> counts_;
};

bool smart_tx_gate(const MdpSolution& policy, std::size_t state);

struct AdaptationState {
    double m = 0.0;
    double cost_prev = 0.0;
    bool has_prev = false;
    double delta_adapt = -1.0;       // < 0: set from the first window
    double delta_fraction = 0.05;
    long long collisions_prev = 0;
};

/// One adaptation step. The first call only records the window cost.
double adapt_cost(AdaptationState& s, double window_cost, bool collisions_increased, const AuxCostGrid& grid);

/// Two-node, shared-slot toy used to check the index rule against the best
/// joint stationary policy. Node n has error levels {0..levels-1}; silent moves
/// up one level with probability p[n]; the scheduled node resets to 0; each
/// slot costs sum_n c[n] * level_n. Exactly one node transmits per slot.
struct IndexToy {
    std::vector<double> p;
    std::vector<double> c;
    int levels = 3;

    MdpModel node_model(std::size_t n) const;
};

struct IndexToyResult {
    double index_rule_cost = 0.0;
    double optimal_cost = 0.0;
    std::size_t policies_searched = 0;
};

IndexToyResult evaluate_index_toy(const IndexToy& toy);

}  // namespace parcomm
