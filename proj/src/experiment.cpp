#include "dx/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dx/errors.hpp"

namespace dx {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::pair<double, double> policy_bounds(const FiniteDistribution& density,
                                        const std::string& policy) {
  if (policy == "exact_support")
    return {density.min_value(), density.max_value()};
  if (policy.rfind("quantile:", 0) == 0) {
    double d = std::stod(policy.substr(9));
    MinMaxPolicy mm = MinMaxPolicy::Quantile(d);
    SpectrumPlan p = make_plan(density, mm, DeltaPolicy::Explicit(1.0));
    return {p.lambda_min, p.lambda_max};
  }
  throw ConfigError("unknown lambda_policy '" + policy + "'");
}

int policy_delta_bits(double width, const std::string& policy) {
  if (policy == "sqrt")
    return std::max(
        1, static_cast<int>(std::ceil(std::sqrt(std::max(width, 0.0)) - 1e-9)));
  if (policy.rfind("value:", 0) == 0) {
    double v = std::stod(policy.substr(6));
    int b = static_cast<int>(std::round(v));
    if (std::abs(v - b) > 1e-9 || b < 1)
      throw ConfigError("delta_policy value must be a whole number of bits");
    return b;
  }
  throw ConfigError("unknown delta_policy '" + policy + "'");
}

}  // namespace

ProtocolInstance ProtocolInstance::resolve(const ExperimentConfig& cfg) {
  if (!cfg.seed_set)
    throw ConfigError("seed is mandatory (no ambient randomness)");
  SourceSpec spec = load_source_file(cfg.source_path);
  ProtocolInstance inst(cfg, spec.make(cfg.n));
  inst.cond_density = exact_block_density_distribution(
      inst.src, DensityKind::x_given_y, cfg.atom_cap);
  inst.reverse_density = exact_block_density_distribution(
      inst.src, DensityKind::y_given_x, cfg.atom_cap);
  inst.sum_density =
      exact_block_density_distribution(inst.src, DensityKind::sum, cfg.atom_cap);
  inst.joint_density = exact_block_density_distribution(
      inst.src, DensityKind::joint, cfg.atom_cap);

  if (cfg.protocol == ProtocolKind::interactive_sw ||
      cfg.protocol == ProtocolKind::data_exchange) {
    auto [lo, hi] = policy_bounds(inst.cond_density, cfg.lambda_policy);
    int delta = policy_delta_bits(hi - lo, cfg.delta_policy);
    SpectrumPlan plan = plan_from_bounds(lo, hi, delta);
    inst.sw_params = make_interactive_sw_params(plan, cfg.eta);
    inst.budget = theorem2_budget(inst.sum_density, cfg.epsilon, plan,
                                  inst.cond_density, cfg.eta);
    if (cfg.protocol == ProtocolKind::data_exchange) {
      ExchangeParams ep;
      ep.sw = *inst.sw_params;
      if (cfg.l_max == "auto")
        ep.l_max = inst.budget->l_max;
      else if (cfg.l_max == "inf" || cfg.l_max == "none")
        ep.l_max = std::numeric_limits<double>::infinity();
      else
        ep.l_max = std::stod(cfg.l_max);
      inst.ex_params = ep;
    }
  } else if (cfg.protocol == ProtocolKind::type_protocol) {
    TypeProtocolParams tp;
    tp.schedule = PhiSchedule(cfg.rate, cfg.step);
    if (cfg.l_max != "auto" && cfg.l_max != "inf" && cfg.l_max != "none")
      tp.l_max = std::stod(cfg.l_max);
    inst.type_params = tp;
  }
  return inst;
}

double ProtocolInstance::budget_limit() const {
  if (ex_params) return ex_params->l_max;
  if (type_params) return type_params->l_max;
  return std::numeric_limits<double>::infinity();
}

ExchangeOutcome ProtocolInstance::run_trial(const Seq& x, const Seq& y,
                                            const SessionRandomness& rnd,
                                            Transcript* transcript) const {
  switch (cfg.protocol) {
    case ProtocolKind::baseline_sw: {
      ExchangeOutcome out =
          baseline_sw(src, x, y, cfg.baseline_l, cfg.eta, rnd);
      return out;
    }
    case ProtocolKind::interactive_sw:
      return interactive_sw(src, x, y, *sw_params, rnd);
    case ProtocolKind::data_exchange:
      return data_exchange(src, x, y, *ex_params, rnd, transcript);
    case ProtocolKind::type_protocol:
      return type_protocol(src, x, y, *type_params, rnd, transcript);
  }
  throw Error("unreachable");
}

std::unique_ptr<PartyMachine> ProtocolInstance::make_party(
    int party, Seq obs, const SessionRandomness& rnd) const {
  switch (cfg.protocol) {
    case ProtocolKind::baseline_sw:
      return make_baseline_party(party, src, std::move(obs), cfg.baseline_l,
                                 cfg.eta, rnd.public_seed);
    case ProtocolKind::interactive_sw:
      return make_sw_party(party, src, std::move(obs), *sw_params,
                           rnd.public_seed);
    case ProtocolKind::data_exchange:
      return make_exchange_party(party, src, std::move(obs), *ex_params,
                                 rnd.public_seed);
    case ProtocolKind::type_protocol:
      return make_type_party(party, src, std::move(obs), *type_params,
                             rnd.public_seed);
  }
  throw Error("unreachable");
}

MonteCarloSummary run_experiment(const ProtocolInstance& inst) {
  return monte_carlo(
      [&](const Seq& x, const Seq& y, const SessionRandomness& rnd) {
        return inst.run_trial(x, y, rnd);
      },
      inst.src, inst.cfg.trials, inst.cfg.seed);
}

namespace {

bool bounds_has(const std::string& list, const std::string& name) {
  size_t pos = 0;
  while (pos <= list.size()) {
    size_t comma = list.find(',', pos);
    std::string tok = list.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok == name) return true;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return false;
}

}  // namespace

std::string run_experiment_csv(const ProtocolInstance& inst) {
  std::ostringstream os;
  os << "trial,correct,bits_total,bits_phase1,bits_phase2,rounds,stop_slice,"
        "error_kind,lambda_min,lambda_max,delta,n_slices,error_rate,mean_bits,"
        "theorem2_budget,singleshot_converse,simple_bound,second_order\n";
  if (inst.cfg.trials == 0) return os.str();  // header-only CSV
  MonteCarloSummary sum = run_experiment(inst);
  for (uint64_t t = 0; t < sum.trials; ++t) {
    const ExchangeOutcome& o = sum.outcomes[t];
    os << t << ',' << (o.correct ? 1 : 0) << ',' << o.total_bits << ','
       << o.phase1_bits << ',' << o.phase2_bits << ',' << o.rounds_used << ','
       << o.stop_slice << ',' << error_kind_name(o.error_kind)
       << ",,,,,,,,,,\n";
  }
  // summary row: plan columns, aggregates, requested bounds
  os << "summary,,,,,,,,";
  if (inst.sw_params) {
    const SpectrumPlan& p = inst.sw_params->plan;
    os << format_double(p.lambda_min) << ',' << format_double(p.lambda_max)
       << ',' << format_double(p.delta) << ',' << p.n_slices;
  } else {
    os << ",,,";
  }
  os << ',' << format_double(sum.error_rate) << ','
     << format_double(sum.mean_bits);
  // requested bound columns
  if (bounds_has(inst.cfg.bounds, "theorem2") && inst.budget)
    os << ',' << format_double(inst.budget->l_max);
  else
    os << ',';
  if (bounds_has(inst.cfg.bounds, "singleshot")) {
    ConverseBound b = best_singleshot_converse(inst.sum_density,
                                               inst.joint_density,
                                               inst.cfg.epsilon);
    os << ',' << format_double(b.value);
  } else {
    os << ',';
  }
  if (bounds_has(inst.cfg.bounds, "simple")) {
    SimpleProtocolBound b = simple_protocol_bound(
        exact_pair_density_distribution(inst.src, inst.cfg.atom_cap),
        inst.cfg.epsilon);
    os << ',' << format_double(b.value);
  } else {
    os << ',';
  }
  if (bounds_has(inst.cfg.bounds, "second_order")) {
    DensityStats st = density_stats(inst.src.component(0));
    SecondOrderLength so =
        second_order_length(st.mean, st.variance, st.third_central_moment,
                            inst.cfg.n, inst.cfg.epsilon);
    os << ',' << format_double(so.value);
  } else {
    os << ',';
  }
  os << '\n';
  return os.str();
}

}  // namespace dx
