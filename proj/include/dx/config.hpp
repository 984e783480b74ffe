#ifndef DX_CONFIG_HPP
#define DX_CONFIG_HPP

#include <string>
#include <vector>

#include "dx/source.hpp"

namespace dx {

// Source description file: flat key-value text.
//
//   # Z-channel
//   alphabet_x = 2
//   alphabet_y = 2
//   pmf = 1/3 0 1/3 1/3        # row-major P(x,y); rationals or decimals
//
// A mixture lists one or more blocks instead of a top-level pmf:
//
//   mixture {
//     weight = 1/2
//     alphabet_x = 2
//     alphabet_y = 2
//     pmf = ...
//   }
//
// Entries parse as exact rationals; a pmf summing to exactly 1 keeps the
// exact table, otherwise doubles are used (sum within 1e-12 required).
struct SourceSpec {
  std::vector<SequenceSource::Component> components;

  SequenceSource make(int n) const {
    return SequenceSource(components, n);
  }
};

SourceSpec parse_source_text(const std::string& text);
SourceSpec load_source_file(const std::string& path);

Rational parse_rational(const std::string& token);

enum class ProtocolKind { baseline_sw, interactive_sw, data_exchange, type_protocol };
enum class RunMode { simulate, peer_listen, peer_connect };

// Experiment configuration: flat key-value text, `source` names the source
// description file. Every field has a CLI flag twin; flags win.
struct ExperimentConfig {
  std::string source_path;
  ProtocolKind protocol = ProtocolKind::data_exchange;
  RunMode mode = RunMode::simulate;
  int n = 8;
  double epsilon = 0.1;
  double eta = 6.0;
  uint64_t trials = 1000;
  uint64_t seed = 1;  // mandatory: no ambient randomness anywhere
  bool seed_set = false;
  std::string lambda_policy = "exact_support";  // or quantile:<delta>
  std::string delta_policy = "sqrt";            // or value:<bits>
  std::string l_max = "auto";                   // or a number
  int baseline_l = 16;
  double rate = 2.0;   // type protocol R
  double step = 0.5;   // type protocol slice
  std::string bounds;  // comma list: theorem2,singleshot,simple,second_order
  std::string out;     // CSV path; empty = stdout
  std::string host = "127.0.0.1";
  int port = 9120;
  uint64_t atom_cap = 8'000'000;
};

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& base_dir);
ExperimentConfig load_config_file(const std::string& path);

ProtocolKind parse_protocol(const std::string& name);
const char* protocol_name(ProtocolKind k);

}  // namespace dx

#endif
