#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace cpa {

// How per-frame signals are realized.
//  Full:       explicit antenna-domain signals; every receiver op runs on
//              actual matrices. Slowest, used for equivalence tests.
//  Virtual:    channels are drawn but only the inner products the decoder
//              actually consumes are kept. Statistically identical to Full
//              (same draws, same order), orders of magnitude lighter.
//  Orthogonal: idealized channels with exactly orthogonal signatures and a
//              single per-frame power draw per user; requires sigma2 == 0.
//              Decoding then degenerates to pure graph peeling, which is the
//              point: it isolates the combinatorics from the physics.
enum class SignalMode { Full, Virtual, Orthogonal };

inline std::string to_string(SignalMode m) {
  switch (m) {
    case SignalMode::Full: return "full";
    case SignalMode::Virtual: return "virtual";
    case SignalMode::Orthogonal: return "orthogonal";
  }
  throw std::logic_error("bad SignalMode");
}

inline SignalMode signal_mode_from_string(const std::string& s) {
  if (s == "full") return SignalMode::Full;
  if (s == "virtual") return SignalMode::Virtual;
  if (s == "orthogonal") return SignalMode::Orthogonal;
  throw std::invalid_argument("unknown signal mode: " + s);
}

// Frame-level system parameters. Geometry: a frame is Delta slots of L
// channel uses each; a slot spends tau uses on pilots and D = L - tau on
// data. K users each activate per slot with probability p_a and, when
// active, pick one of tau pilot sequences uniformly.
struct SystemConfig {
  std::int64_t K = 1000;   // user population
  int M = 400;             // base-station antennas
  int L = 64;              // channel uses per slot
  int tau = 4;             // pilot sequences / pilot length
  double sigma2 = 0.1;     // noise variance per complex dimension
  double R = 1.0;          // code rate on the data section
  int b = 2;               // bits per data symbol (QPSK)
  double p_a = 0.004;      // per-slot activation probability
  std::int64_t Delta = 275;  // slots per frame
  std::uint64_t seed = 1;
  SignalMode mode = SignalMode::Virtual;
  double margin_db = 0.0;  // extra SINR backoff on the decodability test

  int D() const { return L - tau; }

  // Mean slot-activations per user over a frame.
  double alpha() const {
    return static_cast<double>(tau) * static_cast<double>(Delta) / static_cast<double>(K);
  }

  // Mean colliders per (slot, pilot) resource.
  double beta() const { return p_a * static_cast<double>(K) / static_cast<double>(tau); }

  // Choose (Delta, p_a) to hit target load factors. Delta rounds to the
  // nearest slot count, so alpha() is thereafter the attained value, not
  // necessarily the request.
  void set_alpha_beta(double alpha_target, double beta_target) {
    Delta = static_cast<std::int64_t>(
        std::llround(alpha_target * static_cast<double>(K) / static_cast<double>(tau)));
    if (Delta < 1) Delta = 1;
    p_a = std::min(1.0, beta_target * static_cast<double>(tau) / static_cast<double>(K));
  }

  void validate() const {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (M < 1) throw std::invalid_argument("M must be >= 1");
    if (tau < 1) throw std::invalid_argument("tau must be >= 1");
    if (L <= tau) throw std::invalid_argument("L must exceed tau");
    if (sigma2 < 0.0) throw std::invalid_argument("sigma2 must be >= 0");
    if (R <= 0.0) throw std::invalid_argument("R must be > 0");
    if (b < 1) throw std::invalid_argument("b must be >= 1");
    if (p_a < 0.0 || p_a > 1.0) throw std::invalid_argument("p_a must lie in [0,1]");
    if (Delta < 1) throw std::invalid_argument("Delta must be >= 1");
    if (mode == SignalMode::Orthogonal && sigma2 != 0.0)
      throw std::invalid_argument("orthogonal mode requires sigma2 == 0");
  }

  // Threshold the post-combining SINR must meet: 2^(bR) - 1, widened by the
  // configured margin.
  double sinr_threshold() const {
    return (std::exp2(static_cast<double>(b) * R) - 1.0) * std::pow(10.0, margin_db / 10.0);
  }
};

inline void to_json(nlohmann::json& j, const SystemConfig& c) {
  j = nlohmann::json{{"K", c.K},         {"M", c.M},
                     {"L", c.L},         {"tau", c.tau},
                     {"sigma2", c.sigma2}, {"R", c.R},
                     {"b", c.b},         {"p_a", c.p_a},
                     {"Delta", c.Delta}, {"seed", c.seed},
                     {"mode", to_string(c.mode)}, {"margin_db", c.margin_db}};
}

inline void from_json(const nlohmann::json& j, SystemConfig& c) {
  c = SystemConfig{};
  if (j.contains("K")) j.at("K").get_to(c.K);
  if (j.contains("M")) j.at("M").get_to(c.M);
  if (j.contains("L")) j.at("L").get_to(c.L);
  if (j.contains("tau")) j.at("tau").get_to(c.tau);
  if (j.contains("sigma2")) j.at("sigma2").get_to(c.sigma2);
  if (j.contains("R")) j.at("R").get_to(c.R);
  if (j.contains("b")) j.at("b").get_to(c.b);
  if (j.contains("p_a")) j.at("p_a").get_to(c.p_a);
  if (j.contains("Delta")) j.at("Delta").get_to(c.Delta);
  if (j.contains("seed")) j.at("seed").get_to(c.seed);
  if (j.contains("mode")) c.mode = signal_mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("margin_db")) j.at("margin_db").get_to(c.margin_db);
}

SystemConfig load_config(const std::string& path);
void save_config(const SystemConfig& cfg, const std::string& path);

}  // namespace cpa
