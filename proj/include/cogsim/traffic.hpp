#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cogsim/errors.hpp"
#include "cogsim/random.hpp"

namespace cogsim {

// I.i.d. per-slot arrivals of session (1,3) packets at node 1. Session (2,4)
// is saturated and never drawn here.
class ArrivalProcess {
public:
    enum class Kind { bernoulli, pmf };

    ArrivalProcess() : ArrivalProcess(Kind::bernoulli, {1.0, 0.0}) {}

    static ArrivalProcess bernoulli(double lambda)
    {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("bernoulli arrival rate outside [0,1]");
        return ArrivalProcess(Kind::bernoulli, {1.0 - lambda, lambda});
    }

    // probs[k] = Pr(A = k). Entries must be nonnegative and sum to 1.
    static ArrivalProcess from_pmf(const std::map<unsigned, double>& probs)
    {
        if (probs.empty()) throw ConfigError("arrival pmf is empty");
        std::vector<double> dense(probs.rbegin()->first + 1, 0.0);
        double sum = 0.0;
        for (auto [k, p] : probs) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("arrival pmf entry is negative");
            dense[k] = p;
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("arrival pmf sums to " + std::to_string(sum));
        return ArrivalProcess(Kind::pmf, std::move(dense));
    }

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    // Pr(A = 0)
    double p_zero() const { return pmf_.front(); }
    // Pr(A >= 1); the reciprocal is the mean idle period of the primary queue.
    double p_arrival() const { return 1.0 - pmf_.front(); }
    const std::vector<double>& pmf() const { return pmf_; }

    unsigned draw(RandomStream& rng) const
    {
        if (lambda_ == 0.0) return 0;
        const double u = rng.uniform();
        for (unsigned k = 0; k < cdf_.size(); ++k)
            if (u < cdf_[k]) return k;
        return static_cast<unsigned>(cdf_.size() - 1);
    }

private:
    ArrivalProcess(Kind kind, std::vector<double> pmf) : kind_(kind), pmf_(std::move(pmf))
    {
        double acc = 0.0;
        for (std::size_t k = 0; k < pmf_.size(); ++k) {
            lambda_ += static_cast<double>(k) * pmf_[k];
            cdf_.push_back(acc += pmf_[k]);
        }
    }

    Kind kind_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
    double lambda_ = 0.0;
};

} // namespace cogsim
