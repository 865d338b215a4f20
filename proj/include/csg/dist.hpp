#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <type_traits>
#include <utility>
#include <vector>

#include "csg/error.hpp"
#include "csg/rational.hpp"

namespace csg {

inline constexpr double kSumTolerance = 1e-12;

/// Finite-support probability distribution. Probabilities are always
/// available as doubles; distributions built from rationals additionally keep
/// the exact weights, and every operation that combines exact inputs keeps the
/// result exact. Outcomes are unique and kept in first-appearance order.
template <class T>
class Dist {
 public:
  struct Entry {
    T outcome;
    double prob;
  };

  Dist() = default;

  static Dist exact(std::vector<std::pair<T, Rational>> entries) {
    if (entries.empty()) fail(ErrorCode::BadParams, "distribution needs at least one entry");
    Dist d;
    Rational total = 0;
    for (auto& [outcome, p] : entries) {
      if (sgn(p) <= 0) fail(ErrorCode::NonPositiveProb, "probability " + to_string(p) + " is not positive");
      total += p;
      d.add_exact(std::move(outcome), p);
    }
    if (total != 1) fail(ErrorCode::SumNotOne, "probabilities sum to " + to_string(total));
    return d;
  }

  static Dist approx(std::vector<std::pair<T, double>> entries, double tol = kSumTolerance) {
    if (entries.empty()) fail(ErrorCode::BadParams, "distribution needs at least one entry");
    Dist d;
    double total = 0.0;
    for (auto& [outcome, p] : entries) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        std::ostringstream os;
        os << "probability " << p << " is not positive";
        fail(ErrorCode::NonPositiveProb, os.str());
      }
      total += p;
      d.add_approx(std::move(outcome), p);
    }
    if (std::abs(total - 1.0) > tol) {
      std::ostringstream os;
      os.precision(17);
      os << "probabilities sum to " << total;
      fail(ErrorCode::SumNotOne, os.str());
    }
    return d;
  }

  static Dist dirac(T outcome) {
    Dist d;
    d.add_exact(std::move(outcome), Rational(1));
    return d;
  }

  static Dist uniform(std::vector<T> outcomes) {
    if (outcomes.empty()) fail(ErrorCode::BadParams, "uniform distribution over nothing");
    Rational w(1, static_cast<unsigned long>(outcomes.size()));
    std::vector<std::pair<T, Rational>> entries;
    for (auto& o : outcomes) entries.emplace_back(std::move(o), w);
    return exact(std::move(entries));
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const T& outcome(std::size_t i) const { return entries_[i].outcome; }
  double prob(std::size_t i) const { return entries_[i].prob; }
  bool has_exact() const noexcept { return !exact_.empty() || entries_.empty(); }
  bool is_dirac() const noexcept { return entries_.size() == 1; }

  const Rational& exact_prob(std::size_t i) const {
    if (exact_.empty()) fail(ErrorCode::InvariantViolated, "distribution has no exact representation");
    return exact_[i];
  }

  std::optional<std::size_t> find(const T& outcome) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].outcome == outcome) return i;
    return std::nullopt;
  }

  double prob_of(const T& outcome) const {
    auto i = find(outcome);
    return i ? entries_[*i].prob : 0.0;
  }

  Rational exact_prob_of(const T& outcome) const {
    auto i = find(outcome);
    return i ? exact_prob(*i) : Rational(0);
  }

  /// Inverse-CDF sampling with u in [0,1).
  std::size_t sample_index(double u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < entries_.size(); ++i) {
      acc += entries_[i].prob;
      if (u < acc) return i;
    }
    return entries_.size() - 1;
  }
  const T& sample(double u) const { return entries_[sample_index(u)].outcome; }

  /// Push-forward through f; outcomes that collide are merged.
  template <class F>
  auto map(F&& f) const -> Dist<std::decay_t<std::invoke_result_t<F, const T&>>> {
    using U = std::decay_t<std::invoke_result_t<F, const T&>>;
    typename Dist<U>::Accumulator acc;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (has_exact()) {
        acc.add_exact(f(entries_[i].outcome), exact_[i]);
      } else {
        acc.add(f(entries_[i].outcome), entries_[i].prob);
      }
    }
    return std::move(acc).build();
  }

  bool approx_equal(const Dist& other, double tol = 1e-12) const {
    if (size() != other.size()) return false;
    for (const auto& e : entries_) {
      auto j = other.find(e.outcome);
      if (!j || std::abs(other.entries_[*j].prob - e.prob) > tol) return false;
    }
    return true;
  }

  /// Exact equality when both sides are exact, otherwise approx_equal.
  friend bool operator==(const Dist& a, const Dist& b) {
    if (!(a.has_exact() && b.has_exact())) return a.approx_equal(b);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto j = b.find(a.entries_[i].outcome);
      if (!j || b.exact_[*j] != a.exact_[i]) return false;
    }
    return true;
  }

  /// Incremental builder for internally computed mixtures. Zero weights are
  /// skipped; the result is exact iff every added weight was exact.
  class Accumulator {
   public:
    void add_exact(T outcome, const Rational& w) {
      if (sgn(w) == 0) return;
      for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        if (outcomes_[i] == outcome) {
          weights_[i] += w.get_d();
          if (all_exact_) exact_[i] += w;
          return;
        }
      }
      outcomes_.push_back(std::move(outcome));
      weights_.push_back(w.get_d());
      if (all_exact_) exact_.push_back(w);
    }
    void add(T outcome, double w) {
      all_exact_ = false;
      exact_.clear();
      if (w == 0.0) return;
      for (std::size_t i = 0; i < outcomes_.size(); ++i) {
        if (outcomes_[i] == outcome) {
          weights_[i] += w;
          return;
        }
      }
      outcomes_.push_back(std::move(outcome));
      weights_.push_back(w);
    }
    bool empty() const { return outcomes_.empty(); }

    /// Validates the sum (exactly for exact weights) and returns the result.
    Dist build(double tol = 1e-9) && {
      Dist d;
      if (outcomes_.empty()) fail(ErrorCode::BadParams, "empty mixture");
      if (all_exact_) {
        Rational total = 0;
        for (auto& w : exact_) total += w;
        if (total != 1) fail(ErrorCode::SumNotOne, "mixture sums to " + to_string(total));
        for (std::size_t i = 0; i < outcomes_.size(); ++i) {
          exact_[i].canonicalize();
          d.entries_.push_back({std::move(outcomes_[i]), exact_[i].get_d()});
        }
        d.exact_ = std::move(exact_);
      } else {
        double total = 0.0;
        for (double w : weights_) total += w;
        if (std::abs(total - 1.0) > tol) {
          std::ostringstream os;
          os.precision(17);
          os << "mixture sums to " << total;
          fail(ErrorCode::SumNotOne, os.str());
        }
        for (std::size_t i = 0; i < outcomes_.size(); ++i)
          d.entries_.push_back({std::move(outcomes_[i]), weights_[i] / total});
      }
      return d;
    }

   private:
    std::vector<T> outcomes_;
    std::vector<double> weights_;
    std::vector<Rational> exact_;
    bool all_exact_ = true;
  };

 private:
  template <class>
  friend class Dist;

  void add_exact(T outcome, const Rational& p) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].outcome == outcome) {
        exact_[i] += p;
        entries_[i].prob = exact_[i].get_d();
        return;
      }
    }
    entries_.push_back({std::move(outcome), p.get_d()});
    exact_.push_back(p);
  }

  void add_approx(T outcome, double p) {
    for (auto& e : entries_) {
      if (e.outcome == outcome) {
        e.prob += p;
        return;
      }
    }
    entries_.push_back({std::move(outcome), p});
  }

  std::vector<Entry> entries_;
  std::vector<Rational> exact_;
};

}  // namespace csg
