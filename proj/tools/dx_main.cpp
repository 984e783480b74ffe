#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "dx/bounds.hpp"
#include "dx/experiment.hpp"
#include "dx/hashing.hpp"
#include "dx/typescheme.hpp"
#include "dx/wire.hpp"

namespace {

using namespace dx;

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

struct CommonFlags {
  std::string config_path;
  std::string source;
  std::string protocol;
  int n = -1;
  double epsilon = -1.0;
  double eta = -1.0;
  int64_t trials = -1;
  int64_t seed = -1;
  std::string lambda_policy, delta_policy, l_max, bounds, out;
  int baseline_l = -1;
  double rate = -1.0, step = -1.0;
  int port = -1;
  std::string host;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file");
    cmd->add_option("--source", source, "source description file");
    cmd->add_option("--protocol", protocol,
                    "baseline_sw|interactive_sw|data_exchange|type_protocol");
    cmd->add_option("--n", n, "block length");
    cmd->add_option("--epsilon", epsilon, "target error probability");
    cmd->add_option("--eta", eta, "hash slack eta (bits)");
    cmd->add_option("--trials", trials, "Monte Carlo trials");
    cmd->add_option("--seed", seed, "master seed (mandatory somewhere)");
    cmd->add_option("--lambda-policy", lambda_policy,
                    "exact_support | quantile:<d>");
    cmd->add_option("--delta-policy", delta_policy, "sqrt | value:<bits>");
    cmd->add_option("--l-max", l_max, "auto | inf | <bits>");
    cmd->add_option("--l", baseline_l, "baseline one-shot hash bits");
    cmd->add_option("--rate", rate, "type protocol rate R (bits/symbol)");
    cmd->add_option("--step", step, "type protocol slice (bits/symbol)");
    cmd->add_option("--bounds", bounds,
                    "comma list: theorem2,singleshot,simple,second_order");
    cmd->add_option("--out", out, "output CSV path (default stdout)");
    cmd->add_option("--port", port, "peer port");
    cmd->add_option("--host", host, "peer host");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config_file(config_path);
    if (!source.empty()) cfg.source_path = source;
    if (!protocol.empty()) cfg.protocol = parse_protocol(protocol);
    if (n >= 0) cfg.n = n;
    if (epsilon >= 0) cfg.epsilon = epsilon;
    if (eta >= 0) cfg.eta = eta;
    if (trials >= 0) cfg.trials = static_cast<uint64_t>(trials);
    if (seed >= 0) {
      cfg.seed = static_cast<uint64_t>(seed);
      cfg.seed_set = true;
    }
    if (!lambda_policy.empty()) cfg.lambda_policy = lambda_policy;
    if (!delta_policy.empty()) cfg.delta_policy = delta_policy;
    if (!l_max.empty()) cfg.l_max = l_max;
    if (baseline_l >= 0) cfg.baseline_l = baseline_l;
    if (rate >= 0) cfg.rate = rate;
    if (step >= 0) cfg.step = step;
    if (!bounds.empty()) cfg.bounds = bounds;
    if (!out.empty()) cfg.out = out;
    if (port >= 0) cfg.port = port;
    if (!host.empty()) cfg.host = host;
    if (cfg.source_path.empty())
      throw ConfigError("a source file is required (--source or config)");
    return cfg;
  }
};

int cmd_run(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.resolve();
  ProtocolInstance inst = ProtocolInstance::resolve(cfg);
  std::string csv = run_experiment_csv(inst);
  write_out(cfg.out, csv);
  return 0;
}

int cmd_bounds(const CommonFlags& flags) {
  ExperimentConfig cfg = flags.resolve();
  ProtocolInstance inst = ProtocolInstance::resolve(cfg);
  const JointSource& base = inst.src.component(0);
  DensityStats st = density_stats(base);
  std::ostringstream os;
  os << "n,epsilon,lambda_eps,theorem2_l_max,predicted_error,"
        "singleshot_converse,singleshot_gamma,singleshot_vacuous,"
        "simple_bound,second_order,second_order_band,d_epsilon,"
        "sum_second_order_term\n";
  double lam = tail_quantile(inst.sum_density, cfg.epsilon);
  os << cfg.n << ',' << format_double(cfg.epsilon) << ','
     << format_double(lam) << ',';
  if (inst.budget)
    os << format_double(inst.budget->l_max) << ','
       << format_double(inst.budget->predicted_error_bound) << ',';
  else
    os << ",,";
  ConverseBound cb = best_singleshot_converse(inst.sum_density,
                                              inst.joint_density, cfg.epsilon);
  os << format_double(cb.value) << ',' << format_double(cb.gamma) << ','
     << (cb.vacuous ? 1 : 0) << ',';
  SimpleProtocolBound sb = simple_protocol_bound(
      exact_pair_density_distribution(inst.src, cfg.atom_cap), cfg.epsilon);
  os << format_double(sb.value) << ',';
  SecondOrderLength so = second_order_length(
      st.mean, st.variance, st.third_central_moment, cfg.n, cfg.epsilon);
  os << format_double(so.value) << ','
     << (so.band_valid ? format_double(so.band) : "") << ',';
  CovarianceV v = covariance_v(base);
  os << format_double(d_epsilon(v, cfg.epsilon)) << ','
     << format_double(std::sqrt(std::max(v.v11 + 2 * v.v12 + v.v22, 0.0)) *
                      gaussian_q_inv(cfg.epsilon));
  os << '\n';
  write_out(cfg.out, os.str());
  return 0;
}

int cmd_exponents(const CommonFlags& flags, double rate_min, double rate_max,
                  double rate_step, double grid) {
  ExperimentConfig cfg = flags.resolve();
  SourceSpec spec = load_source_file(cfg.source_path);
  const JointSource& base = spec.components.front().source;
  std::ostringstream os;
  os << "R,E_r,E_sp,E_sp_simple,split_r1,q_esp\n";
  if (rate_max < rate_min) rate_max = rate_min;
  for (double r = rate_min; r <= rate_max + 1e-12; r += rate_step) {
    ExponentReport rep = exponents(base, r, grid);
    os << format_double(r) << ',' << format_double(rep.e_r) << ','
       << format_double(rep.e_sp) << ',' << format_double(rep.e_sp_simple)
       << ',' << format_double(rep.split_r1) << ',';
    for (size_t i = 0; i < rep.q_esp.size(); ++i) {
      if (i) os << ';';
      os << format_double(rep.q_esp[i]);
    }
    os << '\n';
    if (rate_step <= 0) break;
  }
  write_out(cfg.out, os.str());
  return 0;
}

int cmd_peer(const CommonFlags& flags, bool listen) {
  ExperimentConfig cfg = flags.resolve();
  cfg.mode = listen ? RunMode::peer_listen : RunMode::peer_connect;
  ProtocolInstance inst = ProtocolInstance::resolve(cfg);
  std::vector<PeerTrial> trials;
  if (listen) {
    TcpListener listener(cfg.port);
    std::cerr << "listening on 127.0.0.1:" << listener.port() << "\n";
    TcpStream s = listener.accept_one();
    trials = peer_run(inst, 1, s);
  } else {
    TcpStream s = TcpStream::connect_to(cfg.host, cfg.port);
    trials = peer_run(inst, 2, s);
  }
  std::ostringstream os;
  os << "trial,correct_own,bits_total,stop_slice,error_kind,transcript_bytes\n";
  for (size_t t = 0; t < trials.size(); ++t) {
    const auto& tr = trials[t];
    os << t << ',' << (tr.outcome.correct ? 1 : 0) << ','
       << tr.outcome.total_bits << ',' << tr.outcome.stop_slice << ','
       << error_kind_name(tr.outcome.error_kind) << ','
       << tr.transcript.serialize().size() << '\n';
  }
  write_out(cfg.out, os.str());
  return 0;
}

int cmd_certify(int m, int l, uint64_t trials, uint64_t seed) {
  Rng rng(seed);
  UniversalityReport rep = two_universal_certificate(m, l, trials, rng);
  bool ok = true;
  auto line = [&](bool pass, const std::string& what) {
    std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
    ok = ok && pass;
  };
  if (rep.exact_checked)
    line(rep.exact_ok, "exact 2-universality (collision prob exactly 2^-l)");
  double band = 5.0 * rep.binom_sigma;
  line(std::abs(rep.mc_rate - rep.bound) <= band,
       "Monte Carlo collision rate " + format_double(rep.mc_rate) +
           " within 5 sigma of 2^-l = " + format_double(rep.bound));
  // prefix-consistency spot check
  Rng prng(seed ^ 0x9E3779B97F4A7C15ull);
  bool prefix_ok = true;
  for (int t = 0; t < 200; ++t) {
    uint64_t s = prng.next_u64();
    HashChain small = HashChain(s, m).extend(3);
    HashChain big = small.extend(2);
    uint64_t x = prng.next_below(1ull << m);
    if (!(big.hash(x).prefix(3) == small.hash(x))) prefix_ok = false;
  }
  line(prefix_ok, "prefix consistency of extended chains");
  // linearity
  bool lin_ok = true;
  for (int t = 0; t < 200; ++t) {
    uint64_t s = prng.next_u64();
    HashChain c = HashChain(s, m).extend(l > 0 ? l : 4);
    uint64_t a = prng.next_below(1ull << m), b = prng.next_below(1ull << m);
    if (!((c.hash(a) ^ c.hash(b)) == c.hash(a ^ b))) lin_ok = false;
  }
  line(lin_ok, "GF(2) linearity of the hash family");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interactive data exchange toolkit"};
  app.require_subcommand(1);

  CommonFlags run_flags, bounds_flags, exp_flags, peer_flags;

  CLI::App* run = app.add_subcommand("run", "run a protocol experiment");
  run_flags.add_to(run);

  CLI::App* bounds = app.add_subcommand("bounds", "evaluate bound sweeps");
  bounds_flags.add_to(bounds);

  CLI::App* expo = app.add_subcommand("exponents", "error exponent sweeps");
  exp_flags.add_to(expo);
  double rate_min = 1.5, rate_max = 1.5, rate_step = 0.1, grid = 1e-3;
  expo->add_option("--rate-min", rate_min, "first rate");
  expo->add_option("--rate-max", rate_max, "last rate");
  expo->add_option("--rate-step", rate_step, "rate increment");
  expo->add_option("--grid", grid, "simplex grid resolution");

  CLI::App* peer = app.add_subcommand("peer", "two-peer socket mode");
  peer_flags.add_to(peer);
  bool listen = false, connect = false;
  peer->add_flag("--listen", listen, "listen for the other peer (party 1)");
  peer->add_flag("--connect", connect, "connect to the listener (party 2)");

  CLI::App* cert =
      app.add_subcommand("certify", "hash universality and invariant checks");
  int cert_m = 24, cert_l = 16;
  uint64_t cert_trials = 200000, cert_seed = 7;
  cert->add_option("--m", cert_m, "input bits");
  cert->add_option("--l", cert_l, "hash bits");
  cert->add_option("--trials", cert_trials, "Monte Carlo trials");
  cert->add_option("--seed", cert_seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (bounds->parsed()) return cmd_bounds(bounds_flags);
    if (expo->parsed())
      return cmd_exponents(exp_flags, rate_min, rate_max, rate_step, grid);
    if (peer->parsed()) {
      if (listen == connect)
        throw dx::ConfigError("peer needs exactly one of --listen/--connect");
      return cmd_peer(peer_flags, listen);
    }
    if (cert->parsed())
      return cmd_certify(cert_m, cert_l, cert_trials, cert_seed);
  } catch (const dx::ConnectionLost& e) {
    std::cerr << "connection lost: " << e.what() << "\n";
    return 3;
  } catch (const dx::HandshakeMismatch& e) {
    std::cerr << "handshake mismatch: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
