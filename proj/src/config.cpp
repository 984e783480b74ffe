#include "dx/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dx/errors.hpp"

namespace dx {

namespace {

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string drop_comment(const std::string& line) {
  size_t h = line.find('#');
  return h == std::string::npos ? line : line.substr(0, h);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

Rational parse_rational(const std::string& token) {
  size_t slash = token.find('/');
  try {
    if (slash != std::string::npos) {
      BigInt num(token.substr(0, slash));
      BigInt den(token.substr(slash + 1));
      if (den == 0) throw ConfigError("division by zero in '" + token + "'");
      return Rational(num, den);
    }
    size_t dot = token.find('.');
    size_t e = token.find_first_of("eE");
    if (dot == std::string::npos && e == std::string::npos)
      return Rational(BigInt(token));
    // decimal (optionally with exponent): exact base-10 rational
    std::string mant = e == std::string::npos ? token : token.substr(0, e);
    long expo = e == std::string::npos ? 0 : std::stol(token.substr(e + 1));
    bool neg = false;
    if (!mant.empty() && (mant[0] == '+' || mant[0] == '-')) {
      neg = mant[0] == '-';
      mant = mant.substr(1);
    }
    std::string digits;
    long frac = 0;
    bool seen_dot = false;
    for (char c : mant) {
      if (c == '.') {
        seen_dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw ConfigError("bad number '" + token + "'");
      digits.push_back(c);
      if (seen_dot) ++frac;
    }
    if (digits.empty()) throw ConfigError("bad number '" + token + "'");
    BigInt num(digits);
    Rational r(num, 1);
    long shift = expo - frac;
    BigInt ten = 10;
    if (shift > 0)
      for (long i = 0; i < shift; ++i) r *= ten;
    else
      for (long i = 0; i < -shift; ++i) r /= ten;
    if (neg) r = -r;
    return r;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + token + "'");
  }
}

namespace {

struct BlockFields {
  int ax = 0, ay = 0;
  std::vector<Rational> pmf;
  Rational weight = 1;
  bool has_weight = false;

  JointSource make_source(int line_no) const {
    if (ax <= 0 || ay <= 0)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": alphabet_x/alphabet_y missing or invalid");
    if (pmf.size() != static_cast<size_t>(ax) * ay)
      throw ConfigError("line " + std::to_string(line_no) + ": pmf needs " +
                        std::to_string(ax * ay) + " entries");
    Rational sum = 0;
    for (const Rational& v : pmf) sum += v;
    if (sum == 1) return JointSource(ax, ay, pmf);
    double dsum = static_cast<double>(sum);
    if (std::abs(dsum - 1.0) > 1e-12)
      throw ConfigError("pmf sums to " + std::to_string(dsum) + ", not 1");
    std::vector<double> d;
    d.reserve(pmf.size());
    for (const Rational& v : pmf) d.push_back(static_cast<double>(v));
    return JointSource(ax, ay, d);
  }
};

void apply_field(BlockFields& b, const std::string& key,
                 const std::string& value, int line_no) {
  if (key == "alphabet_x")
    b.ax = std::stoi(value);
  else if (key == "alphabet_y")
    b.ay = std::stoi(value);
  else if (key == "pmf") {
    for (const std::string& tok : split_ws(value))
      b.pmf.push_back(parse_rational(tok));
  } else if (key == "weight") {
    b.weight = parse_rational(value);
    b.has_weight = true;
  } else {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": unknown source field '" + key + "'");
  }
}

}  // namespace

SourceSpec parse_source_text(const std::string& text) {
  SourceSpec spec;
  std::istringstream is(text);
  std::string line;
  BlockFields top;
  std::vector<BlockFields> blocks;
  BlockFields* current = &top;
  bool in_block = false;
  int line_no = 0, block_open_line = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = strip(drop_comment(line));
    if (s.empty()) continue;
    if (s == "mixture {") {
      if (in_block)
        throw ConfigError("line " + std::to_string(line_no) +
                          ": nested mixture block");
      blocks.emplace_back();
      current = &blocks.back();
      in_block = true;
      block_open_line = line_no;
      continue;
    }
    if (s == "}") {
      if (!in_block)
        throw ConfigError("line " + std::to_string(line_no) + ": stray '}'");
      in_block = false;
      current = &top;
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    apply_field(*current, strip(s.substr(0, eq)), strip(s.substr(eq + 1)),
                line_no);
  }
  if (in_block)
    throw ConfigError("mixture block opened at line " +
                      std::to_string(block_open_line) + " never closed");
  if (!blocks.empty()) {
    if (!top.pmf.empty())
      throw ConfigError("top-level pmf and mixture blocks are exclusive");
    Rational wsum = 0;
    for (const auto& b : blocks) wsum += b.weight;
    if (wsum != 1) {
      double d = static_cast<double>(wsum);
      if (std::abs(d - 1.0) > 1e-12)
        throw ConfigError("mixture weights sum to " + std::to_string(d));
    }
    int ln = 0;
    for (const auto& b : blocks)
      spec.components.push_back(
          {static_cast<double>(b.weight), b.make_source(ln)});
  } else {
    spec.components.push_back({1.0, top.make_source(line_no)});
  }
  return spec;
}

SourceSpec load_source_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open source file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_source_text(ss.str());
}

ProtocolKind parse_protocol(const std::string& name) {
  if (name == "baseline_sw") return ProtocolKind::baseline_sw;
  if (name == "interactive_sw") return ProtocolKind::interactive_sw;
  if (name == "data_exchange") return ProtocolKind::data_exchange;
  if (name == "type_protocol") return ProtocolKind::type_protocol;
  throw ConfigError("unknown protocol '" + name + "'");
}

const char* protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::baseline_sw:
      return "baseline_sw";
    case ProtocolKind::interactive_sw:
      return "interactive_sw";
    case ProtocolKind::data_exchange:
      return "data_exchange";
    case ProtocolKind::type_protocol:
      return "type_protocol";
  }
  return "?";
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& base_dir) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string s = strip(drop_comment(line));
    if (s.empty()) continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = strip(s.substr(0, eq));
    std::string value = strip(s.substr(eq + 1));
    try {
      if (key == "source") {
        cfg.source_path = value;
        if (!base_dir.empty() && !value.empty() && value[0] != '/')
          cfg.source_path = base_dir + "/" + value;
      } else if (key == "protocol")
        cfg.protocol = parse_protocol(value);
      else if (key == "mode") {
        if (value == "simulate")
          cfg.mode = RunMode::simulate;
        else if (value == "peer-listen")
          cfg.mode = RunMode::peer_listen;
        else if (value == "peer-connect")
          cfg.mode = RunMode::peer_connect;
        else
          throw ConfigError("unknown mode '" + value + "'");
      } else if (key == "n")
        cfg.n = std::stoi(value);
      else if (key == "epsilon")
        cfg.epsilon = std::stod(value);
      else if (key == "eta")
        cfg.eta = std::stod(value);
      else if (key == "trials")
        cfg.trials = std::stoull(value);
      else if (key == "seed") {
        cfg.seed = std::stoull(value);
        cfg.seed_set = true;
      } else if (key == "lambda_policy")
        cfg.lambda_policy = value;
      else if (key == "delta_policy")
        cfg.delta_policy = value;
      else if (key == "l_max")
        cfg.l_max = value;
      else if (key == "l")
        cfg.baseline_l = std::stoi(value);
      else if (key == "rate")
        cfg.rate = std::stod(value);
      else if (key == "step")
        cfg.step = std::stod(value);
      else if (key == "bounds")
        cfg.bounds = value;
      else if (key == "out")
        cfg.out = value;
      else if (key == "host")
        cfg.host = value;
      else if (key == "port")
        cfg.port = std::stoi(value);
      else if (key == "atom_cap")
        cfg.atom_cap = std::stoull(value);
      else
        throw ConfigError("unknown config key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  size_t slash = path.find_last_of('/');
  std::string dir = slash == std::string::npos ? "" : path.substr(0, slash);
  return parse_config_text(ss.str(), dir);
}

}  // namespace dx
