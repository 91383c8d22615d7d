// Per-node trust bookkeeping and the job-acceptance decision.
//
// A job arrives with a required trust T. The node checks its direct trust A,
// then its indirect trust B, and only when both fall short does it fuse them
// into a combined trust C. Risk is the shortfall max(0, T - C); the job is
// still taken if that risk fits the node's appetite.

#pragma once

#include <concepts>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "betarisk/beta_fusion.hpp"

namespace betarisk {

enum class Decision {
  AcceptDirect,
  AcceptIndirect,
  AcceptCombined,
  AcceptWithRisk,
  Decline,
};

inline std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::AcceptDirect:
      return "AcceptDirect";
    case Decision::AcceptIndirect:
      return "AcceptIndirect";
    case Decision::AcceptCombined:
      return "AcceptCombined";
    case Decision::AcceptWithRisk:
      return "AcceptWithRisk";
    case Decision::Decline:
      return "Decline";
  }
  return "unknown";
}

/// Decision plus the risk it carries. risk > 0 exactly for AcceptWithRisk
/// and Decline.
struct DecisionOutcome {
  Decision kind = Decision::AcceptDirect;
  double risk = 0.0;

  bool accepted() const noexcept { return kind != Decision::Decline; }

  friend bool operator==(const DecisionOutcome&,
                         const DecisionOutcome&) = default;
};

/// Largest risk a node will take on to process a job anyway.
class RiskAppetite {
 public:
  constexpr RiskAppetite() = default;

  explicit RiskAppetite(double max_acceptable_risk)
      : max_(max_acceptable_risk) {
    if (!(max_acceptable_risk >= 0.0 && max_acceptable_risk <= 1.0)) {
      std::ostringstream msg;
      msg << "max_acceptable_risk " << max_acceptable_risk
          << " outside [0, 1]";
      throw std::domain_error(msg.str());
    }
  }

  constexpr double max_acceptable_risk() const noexcept { return max_; }

  friend constexpr bool operator==(RiskAppetite, RiskAppetite) = default;

 private:
  double max_ = 0.0;
};

/// One directed edge's (T, A, B, C, R) together with the outcome.
/// `combined` is empty when the decision was reached from A or B alone.
struct TrustRecord {
  TrustValue required;
  TrustEstimate direct;
  TrustEstimate indirect;
  std::optional<TrustValue> combined;
  double risk = 0.0;
  DecisionOutcome decision;

  /// C as shown in tables: 0 when never computed.
  double combined_or_zero() const {
    return combined ? combined->value() : 0.0;
  }

  friend bool operator==(const TrustRecord&, const TrustRecord&) = default;
};

template <class F>
concept TrustCombiner = requires(const F& f, const TrustEstimate& a,
                                 const TrustEstimate& b) {
  { f(a, b) } -> std::convertible_to<TrustValue>;
};

/// Posterior-mean fusion. The direct estimate is the prior unless
/// `indirect_as_prior` is set.
struct BetaCombiner {
  bool indirect_as_prior = false;

  static constexpr std::string_view name = "beta";

  TrustValue operator()(const TrustEstimate& direct,
                        const TrustEstimate& indirect) const {
    return indirect_as_prior ? combined_trust(indirect, direct)
                             : combined_trust(direct, indirect);
  }
};

/// Unweighted mean (A + B) / 2. A simple baseline for side-by-side
/// comparison; it is not a calibrated weighting scheme.
struct AverageCombiner {
  static constexpr std::string_view name = "average";

  TrustValue operator()(const TrustEstimate& direct,
                        const TrustEstimate& indirect) const {
    return TrustValue(0.5 * (direct.mean.value() + indirect.mean.value()));
  }
};

inline double risk_value(TrustValue required, TrustValue achieved) {
  const double shortfall = required.value() - achieved.value();
  return shortfall > 0.0 ? shortfall : 0.0;
}

template <TrustCombiner Combiner = BetaCombiner>
TrustRecord evaluate_request(TrustValue required, const TrustEstimate& direct,
                             const TrustEstimate& indirect,
                             RiskAppetite appetite = {},
                             const Combiner& combine = {}) {
  TrustRecord rec;
  rec.required = required;
  rec.direct = direct;
  rec.indirect = indirect;

  if (direct.mean >= required) {
    rec.decision = {Decision::AcceptDirect, 0.0};
    return rec;
  }
  if (indirect.mean >= required) {
    rec.decision = {Decision::AcceptIndirect, 0.0};
    return rec;
  }

  const TrustValue c = combine(direct, indirect);
  rec.combined = c;
  rec.risk = risk_value(required, c);
  if (rec.risk == 0.0) {
    rec.decision = {Decision::AcceptCombined, 0.0};
  } else if (rec.risk <= appetite.max_acceptable_risk()) {
    rec.decision = {Decision::AcceptWithRisk, rec.risk};
  } else {
    rec.decision = {Decision::Decline, rec.risk};
  }
  return rec;
}

/// A node's record about itself: T = 0, A = B = C = 1, R = 0.
inline TrustRecord self_record() {
  TrustRecord rec;
  rec.required = TrustValue(0.0);
  rec.direct = TrustEstimate(1.0);
  rec.indirect = TrustEstimate(1.0);
  rec.combined = TrustValue(1.0);
  rec.risk = 0.0;
  rec.decision = {Decision::AcceptDirect, 0.0};
  return rec;
}

/// Replaces whichever estimates are supplied and re-runs the decision from
/// scratch against the record's required trust.
template <TrustCombiner Combiner = BetaCombiner>
TrustRecord update_record(const TrustRecord& old,
                          const std::optional<TrustEstimate>& new_direct,
                          const std::optional<TrustEstimate>& new_indirect,
                          RiskAppetite appetite = {},
                          const Combiner& combine = {}) {
  if (!new_direct && !new_indirect) {
    throw std::invalid_argument("update_record needs at least one estimate");
  }
  return evaluate_request(old.required, new_direct.value_or(old.direct),
                          new_indirect.value_or(old.indirect), appetite,
                          combine);
}

/// The table a node keeps about its peers. Not synchronised; callers that
/// share one across threads must serialise writes.
template <TrustCombiner Combiner = BetaCombiner>
class TrustTable {
 public:
  using PeerId = std::size_t;

  explicit TrustTable(RiskAppetite appetite = {}, Combiner combine = {})
      : appetite_(appetite), combine_(combine) {}

  const TrustRecord& assess(PeerId peer, TrustValue required,
                            const TrustEstimate& direct,
                            const TrustEstimate& indirect) {
    auto rec = evaluate_request(required, direct, indirect, appetite_,
                                combine_);
    return records_.insert_or_assign(peer, std::move(rec)).first->second;
  }

  const TrustRecord& update(PeerId peer,
                            const std::optional<TrustEstimate>& new_direct,
                            const std::optional<TrustEstimate>& new_indirect) {
    auto it = records_.find(peer);
    if (it == records_.end()) {
      throw std::out_of_range("no trust record for peer " +
                              std::to_string(peer));
    }
    it->second = update_record(it->second, new_direct, new_indirect,
                               appetite_, combine_);
    return it->second;
  }

  const TrustRecord* find(PeerId peer) const {
    auto it = records_.find(peer);
    return it == records_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return records_.size(); }
  RiskAppetite appetite() const noexcept { return appetite_; }

 private:
  RiskAppetite appetite_;
  Combiner combine_;
  std::map<PeerId, TrustRecord> records_;
};

}  // namespace betarisk
