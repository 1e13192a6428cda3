#include "parcomm/smart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parcomm {

namespace {

double span(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.maxCoeff() - v.minCoeff(); }

void check_stochastic(const Eigen::MatrixXd& P, const char* name) {
    for (Eigen::Index r = 0; r < P.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < P.cols(); ++c) {
            if (!(P(r, c) >= 0.0)) throw std::invalid_argument(std::string(name) + ": negative or NaN entry");
            sum += P(r, c);
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(std::string(name) + ": row does not sum to 1");
    }
}

// Q-values of both actions under cost-to-go f.
void q_values(const MdpModel& model, double m, const Eigen::VectorXd& f, Eigen::VectorXd& q0, Eigen::VectorXd& q1) {
    q0 = model.E0 + model.P0 * f;
    q1 = model.E1 + model.P1 * f;
    q1.array() += m;
}

bool prefers_transmit(double q0, double q1) { return q1 < q0 - 1e-9 * std::max(1.0, std::abs(q0)); }

}  // namespace

void MdpModel::validate() const {
    const Eigen::Index n = E0.size();
    if (n == 0) throw std::invalid_argument("MdpModel: empty state space");
    if (E1.size() != n || P0.rows() != n || P0.cols() != n || P1.rows() != n || P1.cols() != n)
        throw std::invalid_argument("MdpModel: inconsistent dimensions");
    if (!E0.allFinite() || !E1.allFinite()) throw std::invalid_argument("MdpModel: non-finite cost");
    check_stochastic(P0, "MdpModel P0");
    check_stochastic(P1, "MdpModel P1");
}

double bellman_residual(const MdpModel& model, double m, const Eigen::VectorXd& f) {
    Eigen::VectorXd q0, q1;
    q_values(model, m, f, q0, q1);
    return span(q0.cwiseMin(q1) - f);
}

MdpSolution solve_decoupled_mdp(const MdpModel& model, double m, double tol, int max_sweeps) {
    model.validate();
    if (!std::isfinite(m)) throw std::invalid_argument("solve_decoupled_mdp: m must be finite");
    const Eigen::Index n = model.E0.size();

    // Lazy transform P' = (P + I) / 2 makes every policy's chain aperiodic
    // without changing average costs or minimizers; the cost-to-go doubles.
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    MdpModel lazy = model;
    lazy.P0 = 0.5 * (model.P0 + I);
    lazy.P1 = 0.5 * (model.P1 + I);

    Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd q0, q1, next;
    MdpSolution sol;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        q_values(lazy, m, h, q0, q1);
        next = q0.cwiseMin(q1);
        const double ref = next[0];
        next.array() -= ref;
        const double diff = span(next - h);
        h = next;
        sol.J = ref;
        sol.sweeps = sweep;
        if (diff < tol) break;
        if (sweep == max_sweeps)
            throw SolverError("solve_decoupled_mdp: no convergence after " + std::to_string(max_sweeps) + " sweeps");
    }
    sol.f = 0.5 * h;
    q_values(model, m, sol.f, q0, q1);
    sol.transmit.resize(static_cast<std::size_t>(n));
    for (Eigen::Index x = 0; x < n; ++x) sol.transmit[static_cast<std::size_t>(x)] = prefers_transmit(q0[x], q1[x]);
    sol.residual = span(q0.cwiseMin(q1) - sol.f);
    // J from the original equation at the reference state.
    sol.J = std::min(q0[0], q1[0]) - sol.f[0];
    return sol;
}

double whittle_index(const MdpModel& model, std::size_t state, double m_hi, double tol) {
    auto transmits = [&](double m) -> bool { return solve_decoupled_mdp(model, m, 1e-11).transmit.at(state); };
    if (!transmits(0.0)) return 0.0;
    if (transmits(m_hi)) return m_hi;
    double lo = 0.0, hi = m_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (transmits(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void AuxCostGrid::validate() const {
    if (!(std::isfinite(m_min) && std::isfinite(m_max) && m_min <= m_max))
        throw std::invalid_argument("smart grid needs finite m_min <= m_max");
    if (!(m_int > 0.0)) throw std::invalid_argument("smart.m_int must be positive");
}

std::vector<double> AuxCostGrid::points() const {
    validate();
    std::vector<double> out;
    const auto steps = static_cast<long>(std::floor((m_max - m_min) / m_int + 1e-9));
    for (long k = 0; k <= steps; ++k) out.push_back(m_min + static_cast<double>(k) * m_int);
    if (m_max - out.back() > 1e-9 * std::max(1.0, std::abs(m_max))) out.push_back(m_max);
    return out;
}

std::size_t AuxCostGrid::index_of(double m) const {
    const auto pts = points();
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (std::abs(pts[i] - m) < std::abs(pts[best] - m)) best = i;
    return best;
}

double AuxCostGrid::snap(double m) const { return points()[index_of(m)]; }

const MdpSolution& PolicyBank::policy_for(double m_value) const {
    if (m.empty()) throw std::out_of_range("PolicyBank: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < m.size(); ++i)
        if (std::abs(m[i] - m_value) < std::abs(m[best] - m_value)) best = i;
    return solutions[best];
}

std::uint64_t model_hash(const MdpModel& model) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
    auto feed = [&h](const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    const std::uint64_t n = model.states();
    feed(&n, sizeof n);
    for (const Eigen::MatrixXd* P : {&model.P0, &model.P1})
        for (Eigen::Index r = 0; r < P->rows(); ++r)
            for (Eigen::Index c = 0; c < P->cols(); ++c) {
                const double v = (*P)(r, c);
                feed(&v, sizeof v);
            }
    for (const Eigen::VectorXd* E : {&model.E0, &model.E1})
        for (Eigen::Index i = 0; i < E->size(); ++i) {
            const double v = (*E)[i];
            feed(&v, sizeof v);
        }
    return h;
}

PolicyBank build_policy_bank(const AuxCostGrid& grid, const MdpModel& model) {
    model.validate();
    PolicyBank bank;
    bank.grid = grid;
    bank.model_hash = model_hash(model);
    bank.states = model.states();
    bank.m = grid.points();
    for (double m : bank.m) bank.solutions.push_back(solve_decoupled_mdp(model, m));
    return bank;
}

ErrorGrid::ErrorGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty() || points_.front() != 0.0) throw std::invalid_argument("error grid must start at 0");
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (!(points_[i] > points_[i - 1])) throw std::invalid_argument("error grid must be strictly ascending");
}

std::size_t ErrorGrid::project(double error) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < points_.size(); ++i)
        if (std::abs(points_[i] - error) < std::abs(points_[best] - error)) best = i;
    return best;
}

TransitionCounter::TransitionCounter(std::size_t states) : n_(states), counts_(states * states, 0) {
    if (states == 0) throw std::invalid_argument("TransitionCounter: no states");
}

void TransitionCounter::add(std::size_t from, std::size_t to) { ++counts_.at(from * n_ + to); }

void TransitionCounter::merge(const TransitionCounter& other) {
    if (other.n_ != n_) throw std::invalid_argument("TransitionCounter: size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t TransitionCounter::count(std::size_t from, std::size_t to) const { return counts_.at(from * n_ + to); }

MdpModel TransitionCounter::build(const ErrorGrid& grid) const {
    if (grid.size() != n_) throw std::invalid_argument("TransitionCounter: grid size mismatch");
    const auto n = static_cast<Eigen::Index>(n_);
    MdpModel m;
    m.P0 = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r = 0; r < n_; ++r) {
        std::uint64_t total = 0;
        for (std::size_t c = 0; c < n_; ++c) total += counts_[r * n_ + c];
        const auto row = static_cast<Eigen::Index>(r);
        if (total == 0) {
            const auto up = static_cast<Eigen::Index>(std::min(r + 1, n_ - 1));
            m.P0(row, row) += 0.5;
            m.P0(row, up) += 0.5;
            continue;
        }
        for (std::size_t c = 0; c < n_; ++c)
            m.P0(row, static_cast<Eigen::Index>(c)) =
                static_cast<double>(counts_[r * n_ + c]) / static_cast<double>(total);
    }
    m.P1 = m.P0.row(0).replicate(n, 1);
    m.E0.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) m.E0[i] = grid.value(static_cast<std::size_t>(i));
    m.E1 = Eigen::VectorXd::Constant(n, grid.value(0));
    return m;
}

bool smart_tx_gate(const MdpSolution& policy, std::size_t state) { return policy.transmit.at(state); }

double adapt_cost(AdaptationState& s, double window_cost, bool collisions_increased, const AuxCostGrid& grid) {
    if (!s.has_prev) {
        s.has_prev = true;
        s.cost_prev = window_cost;
        if (s.delta_adapt < 0.0) s.delta_adapt = s.delta_fraction * std::abs(window_cost);
        s.m = grid.snap(s.m);
        return s.m;
    }
    const double change = window_cost - s.cost_prev;
    if (change > s.delta_adapt && collisions_increased) {
        s.m = std::min(s.m + grid.m_int, grid.m_max);
    } else if (std::abs(change) < s.delta_adapt) {
        // unchanged
    } else {
        s.m = std::max(s.m - grid.m_int, grid.m_min);
    }
    s.m = grid.snap(s.m);
    s.cost_prev = window_cost;
    return s.m;
}

MdpModel IndexToy::node_model(std::size_t n) const {
    const Eigen::Index L = levels;
    MdpModel m;
    m.P0 = Eigen::MatrixXd::Zero(L, L);
    m.P1 = Eigen::MatrixXd::Zero(L, L);
    m.E0.resize(L);
    for (Eigen::Index x = 0; x < L; ++x) {
        const Eigen::Index up = std::min<Eigen::Index>(x + 1, L - 1);
        m.P0(x, x) += 1.0 - p[n];
        m.P0(x, up) += p[n];
        m.P1(x, 0) = 1.0;
        m.E0[x] = c[n] * static_cast<double>(x);
    }
    m.E1 = m.E0;
    return m;
}

namespace {

// Long-run average cost of a joint schedule started from (0, 0). The lazy
// chain converges to the limiting distribution of the Cesaro average.
double joint_average_cost(const IndexToy& toy, const std::vector<int>& who) {
    const int L = toy.levels;
    const int S = L * L;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    Eigen::VectorXd cost(S);
    for (int s = 0; s < S; ++s) {
        const int e[2] = {s / L, s % L};
        cost[s] = toy.c[0] * e[0] + toy.c[1] * e[1];
        const int k = who[static_cast<std::size_t>(s)];
        const int o = 1 - k;
        // scheduled node resets; the other drifts up with probability p
        const int up = std::min(e[o] + 1, L - 1);
        for (int step = 0; step < 2; ++step) {
            const int eo = step == 0 ? e[o] : up;
            const double pr = step == 0 ? 1.0 - toy.p[static_cast<std::size_t>(o)] : toy.p[static_cast<std::size_t>(o)];
            int ne[2];
            ne[k] = 0;
            ne[o] = eo;
            P(s, ne[0] * L + ne[1]) += pr;
        }
    }
    const Eigen::MatrixXd lazy = 0.5 * (P + Eigen::MatrixXd::Identity(S, S));
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(S);
    mu[0] = 1.0;
    for (int it = 0; it < 200000; ++it) {
        Eigen::RowVectorXd next = mu * lazy;
        const double d = (next - mu).cwiseAbs().sum();
        mu = next;
        if (d < 1e-14) break;
    }
    return mu * cost;
}

}  // namespace

IndexToyResult evaluate_index_toy(const IndexToy& toy) {
    if (toy.p.size() != 2 || toy.c.size() != 2 || toy.levels < 2)
        throw std::invalid_argument("IndexToy: two nodes and at least two levels required");
    const int L = toy.levels;
    const int S = L * L;

    std::vector<std::vector<double>> index(2, std::vector<double>(static_cast<std::size_t>(L)));
    const double m_hi = 100.0 * std::max(toy.c[0], toy.c[1]) * L;
    for (std::size_t n = 0; n < 2; ++n) {
        const MdpModel model = toy.node_model(n);
        for (int x = 0; x < L; ++x) index[n][static_cast<std::size_t>(x)] = whittle_index(model, static_cast<std::size_t>(x), m_hi);
    }

    std::vector<int> rule(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s)
        rule[static_cast<std::size_t>(s)] =
            index[1][static_cast<std::size_t>(s % L)] > index[0][static_cast<std::size_t>(s / L)] ? 1 : 0;

    IndexToyResult r;
    r.index_rule_cost = joint_average_cost(toy, rule);
    r.optimal_cost = std::numeric_limits<double>::infinity();
    std::vector<int> who(static_cast<std::size_t>(S));
    const std::uint64_t total = 1ULL << S;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (int s = 0; s < S; ++s) who[static_cast<std::size_t>(s)] = static_cast<int>((mask >> s) & 1U);
        r.optimal_cost = std::min(r.optimal_cost, joint_average_cost(toy, who));
    }
    r.policies_searched = static_cast<std::size_t>(total);
    return r;
}

}  // namespace parcomm
