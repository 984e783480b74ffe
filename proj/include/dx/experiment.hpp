#ifndef DX_EXPERIMENT_HPP
#define DX_EXPERIMENT_HPP

#include <memory>
#include <optional>
#include <string>

#include "dx/bounds.hpp"
#include "dx/config.hpp"
#include "dx/protocols.hpp"
#include "dx/typescheme.hpp"

namespace dx {

// Config resolved into concrete protocol parameters and the exact block
// distributions the bound evaluators need. Both simulate and peer mode run
// from the same resolved instance, which is what makes them bit-equivalent.
struct ProtocolInstance {
  ProtocolInstance(ExperimentConfig c, SequenceSource s)
      : cfg(std::move(c)), src(std::move(s)) {}

  ExperimentConfig cfg;
  SequenceSource src;
  FiniteDistribution cond_density;   // h(X|Y) over the block
  FiniteDistribution reverse_density;  // h(Y|X)
  FiniteDistribution sum_density;    // h(X dY)
  FiniteDistribution joint_density;  // h(XY)
  std::optional<InteractiveSwParams> sw_params;
  std::optional<ExchangeParams> ex_params;
  std::optional<TypeProtocolParams> type_params;
  std::optional<Theorem2Budget> budget;

  static ProtocolInstance resolve(const ExperimentConfig& cfg);

  ExchangeOutcome run_trial(const Seq& x, const Seq& y,
                            const SessionRandomness& rnd,
                            Transcript* transcript = nullptr) const;

  std::unique_ptr<PartyMachine> make_party(int party, Seq obs,
                                           const SessionRandomness& rnd) const;

  double budget_limit() const;  // resolved l_max (infinity when unlimited)
};

// Runs trials in simulate mode and renders the CSV (one row per trial plus
// a summary row carrying the plan columns and any requested bounds).
std::string run_experiment_csv(const ProtocolInstance& inst);

MonteCarloSummary run_experiment(const ProtocolInstance& inst);

std::string format_double(double v);  // full round-trip precision

}  // namespace dx

#endif
