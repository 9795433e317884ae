#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cogsim/errors.hpp"

namespace cogsim {

inline constexpr double kRowSumTolerance = 1e-12;

// Finite irreducible chain with its stationary distribution.
class MarkovChainModel {
public:
    MarkovChainModel(std::vector<std::string> labels, Eigen::MatrixXd transition)
        : labels_(std::move(labels)), p_(std::move(transition))
    {
        const auto n = p_.rows();
        if (n == 0 || p_.cols() != n || static_cast<std::size_t>(n) != labels_.size())
            throw ConfigError("transition matrix shape does not match the state labels");
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j)
                if (!(p_(i, j) >= -kRowSumTolerance))
                    throw InvariantViolation("negative transition probability in row " + labels_[i]);
            if (std::abs(p_.row(i).sum() - 1.0) > kRowSumTolerance)
                throw InvariantViolation("transition row " + labels_[i] + " sums to " +
                                         std::to_string(p_.row(i).sum()));
        }
        pi_ = solve_stationary(p_);
    }

    const std::vector<std::string>& labels() const { return labels_; }
    const Eigen::MatrixXd& transition() const { return p_; }
    const Eigen::VectorXd& stationary() const { return pi_; }
    double pi(Eigen::Index state) const { return pi_(state); }
    Eigen::Index size() const { return p_.rows(); }

    // max |pi P - pi|
    double stationary_residual() const { return (pi_.transpose() * p_ - pi_.transpose()).cwiseAbs().maxCoeff(); }

    // Solves (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    static Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p)
    {
        const auto n = p.rows();
        Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(n, n);
        a.row(n - 1).setOnes();
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
        b(n - 1) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible()) throw InvariantViolation("chain has no unique stationary distribution");
        return lu.solve(b);
    }

private:
    std::vector<std::string> labels_;
    Eigen::MatrixXd p_;
    Eigen::VectorXd pi_;
};

} // namespace cogsim
