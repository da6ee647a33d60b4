#include "vmass/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vmass {

namespace {

constexpr double kPivTol = 1e-9;
constexpr double kFeasTol = 1e-9;

class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
            const std::vector<double>& c)
        : m_(static_cast<int>(A.size())), n_(static_cast<int>(c.size())), cost_(c) {
        rows_.assign(static_cast<std::size_t>(m_),
                     std::vector<double>(static_cast<std::size_t>(n_ + m_ + 1), 0.0));
        basis_.assign(static_cast<std::size_t>(m_), 0);
        flipped_.assign(static_cast<std::size_t>(m_), false);
        for (int i = 0; i < m_; ++i) {
            if (static_cast<int>(A[static_cast<std::size_t>(i)].size()) != n_)
                throw std::invalid_argument("solve_lp: ragged constraint matrix");
            flipped_[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] < 0.0;
            double flip = flipped_[static_cast<std::size_t>(i)] ? -1.0 : 1.0;
            for (int j = 0; j < n_; ++j)
                at(i, j) = flip * A[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            at(i, n_ + i) = 1.0;  // artificial
            rhs(i) = flip * b[static_cast<std::size_t>(i)];
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        }
    }

    LpResult run() {
        LpResult res;
        // phase 1: minimize the sum of artificials
        std::vector<double> phase1(static_cast<std::size_t>(n_ + m_), 0.0);
        for (int i = 0; i < m_; ++i) phase1[static_cast<std::size_t>(n_ + i)] = 1.0;
        build_cost_row(phase1);
        int it1 = iterate(/*allow_artificial=*/true);
        if (it1 < 0) throw std::runtime_error("solve_lp: phase 1 reported unbounded");
        res.iterations += it1;
        if (objective_ > kFeasTol * scale()) {
            res.status = LpStatus::infeasible;
            res.objective = objective_;
            res.farkas = dual(phase1);
            return res;
        }
        drive_out_artificials();

        // phase 2: the real objective over the original columns
        std::vector<double> full_cost = cost_;
        full_cost.resize(static_cast<std::size_t>(n_ + m_), 0.0);
        build_cost_row(full_cost);
        int it = iterate(/*allow_artificial=*/false);
        res.iterations += it;
        if (it < 0) {
            res.status = LpStatus::unbounded;
            return res;
        }
        res.status = LpStatus::optimal;
        res.objective = objective_;
        res.x.assign(static_cast<std::size_t>(n_), 0.0);
        for (int i = 0; i < m_; ++i)
            if (basis_[static_cast<std::size_t>(i)] < n_)
                res.x[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = rhs(i);
        res.y = dual(full_cost);
        return res;
    }

private:
    double& at(int i, int j) { return rows_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    double& rhs(int i) { return rows_[static_cast<std::size_t>(i)][static_cast<std::size_t>(n_ + m_)]; }

    double scale() const {
        double s = 1.0;
        for (const auto& r : rows_)
            for (double v : r) s = std::max(s, std::abs(v));
        return s;
    }

    // reduced costs z_j = c_j - c_B . B^{-1} A_j from the current basis
    void build_cost_row(const std::vector<double>& c) {
        red_.assign(static_cast<std::size_t>(n_ + m_), 0.0);
        objective_ = 0.0;
        for (int j = 0; j < n_ + m_; ++j) red_[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
        for (int i = 0; i < m_; ++i) {
            double cb = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            for (int j = 0; j < n_ + m_; ++j) red_[static_cast<std::size_t>(j)] -= cb * at(i, j);
            objective_ += cb * rhs(i);
        }
    }

    void pivot(int r, int s) {
        double inv = 1.0 / at(r, s);
        for (int j = 0; j <= n_ + m_; ++j) at(r, j) *= inv;
        at(r, s) = 1.0;  // cut rounding noise on the pivot itself
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double f = at(i, s);
            if (f == 0.0) continue;
            for (int j = 0; j <= n_ + m_; ++j) at(i, j) -= f * at(r, j);
            at(i, s) = 0.0;
        }
        double f = red_[static_cast<std::size_t>(s)];
        if (f != 0.0) {
            for (int j = 0; j < n_ + m_; ++j) red_[static_cast<std::size_t>(j)] -= f * at(r, j);
            red_[static_cast<std::size_t>(s)] = 0.0;
            objective_ += f * rhs(r);
        }
        basis_[static_cast<std::size_t>(r)] = s;
    }

    // returns iterations, or -1 on unboundedness
    int iterate(bool allow_artificial) {
        const int bland_after = 2 * (m_ + n_);
        int iters = 0;
        for (;;) {
            const bool bland = iters > bland_after;
            int enter = -1;
            double best = -kPivTol;
            const int limit = allow_artificial ? n_ + m_ : n_;
            for (int j = 0; j < limit; ++j) {
                double rc = red_[static_cast<std::size_t>(j)];
                if (rc < -kPivTol) {
                    if (bland) { enter = j; break; }
                    if (rc < best) { best = rc; enter = j; }
                }
            }
            if (enter < 0) return iters;

            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m_; ++i) {
                double a = at(i, enter);
                if (a > kPivTol) {
                    double ratio = rhs(i) / a;
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 && leave >= 0 &&
                         basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return -1;  // unbounded
            pivot(leave, enter);
            ++iters;
        }
    }

    // replace basic artificials by real columns; rows with no usable entry
    // are redundant and get neutralized in place
    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            int enter = -1;
            double best = 0.0;
            for (int j = 0; j < n_; ++j) {
                double a = std::abs(at(i, j));
                if (a > best && a > kPivTol) { best = a; enter = j; }
            }
            if (enter >= 0) {
                double f = red_[static_cast<std::size_t>(enter)];
                double inv = 1.0 / at(i, enter);
                for (int j = 0; j <= n_ + m_; ++j) at(i, j) *= inv;
                for (int r = 0; r < m_; ++r) {
                    if (r == i) continue;
                    double g = at(r, enter);
                    if (g == 0.0) continue;
                    for (int j = 0; j <= n_ + m_; ++j) at(r, j) -= g * at(i, j);
                }
                if (f != 0.0)
                    for (int j = 0; j < n_ + m_; ++j) red_[static_cast<std::size_t>(j)] -= f * at(i, j);
                basis_[static_cast<std::size_t>(i)] = enter;
            }
            // else: dependent row already reduced to ~0 = 0; harmless
        }
    }

    // y_i = -reduced cost of artificial column i (those columns form the
    // identity at the start, so they carry B^{-1}); undo the row flips
    std::vector<double> dual(const std::vector<double>& c) {
        std::vector<double> y(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            double art_cost = c[static_cast<std::size_t>(n_ + i)];
            y[static_cast<std::size_t>(i)] = art_cost - red_[static_cast<std::size_t>(n_ + i)];
            if (flipped_[static_cast<std::size_t>(i)]) y[static_cast<std::size_t>(i)] *= -1.0;
        }
        return y;
    }

    int m_, n_;
    std::vector<std::vector<double>> rows_;
    std::vector<int> basis_;
    std::vector<bool> flipped_;
    std::vector<double> red_;
    std::vector<double> cost_;
    double objective_ = 0.0;
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b, const std::vector<double>& c) {
    if (A.size() != b.size()) throw std::invalid_argument("solve_lp: |A| != |b|");
    return Tableau(A, b, c).run();
}

}  // namespace vmass
