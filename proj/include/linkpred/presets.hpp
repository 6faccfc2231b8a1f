#pragma once

// Named experiment presets. The two regularization families are mutually
// exclusive by construction: dropout presets train with keep probability 1/2
// and no weight decay; the l2 presets keep every unit and decay weights.
//
//   MF2    factor model, l2 regularization
//   AE2    autoencoder, l2 regularization
//   MFd    factor model, hidden-unit dropout
//   AEd    autoencoder, input + hidden dropout
//   MF+AE  joint model, input + hidden dropout
//   AA     Adamic-Adar baseline (no training)
//   RW     random walk with restart baseline (no training)

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "linkpred/model.hpp"
#include "linkpred/training.hpp"

namespace linkpred {

enum class Preset { Mf2, Ae2, Mfd, Aed, MfAe, AdamicAdar, RandomWalk };

inline const char* to_string(Preset p) {
  switch (p) {
    case Preset::Mf2: return "MF2";
    case Preset::Ae2: return "AE2";
    case Preset::Mfd: return "MFd";
    case Preset::Aed: return "AEd";
    case Preset::MfAe: return "MF+AE";
    case Preset::AdamicAdar: return "AA";
    case Preset::RandomWalk: return "RW";
  }
  return "?";
}

inline std::optional<Preset> parse_preset(const std::string& name) {
  if (name == "MF2") return Preset::Mf2;
  if (name == "AE2") return Preset::Ae2;
  if (name == "MFd") return Preset::Mfd;
  if (name == "AEd") return Preset::Aed;
  if (name == "MF+AE") return Preset::MfAe;
  if (name == "AA") return Preset::AdamicAdar;
  if (name == "RW") return Preset::RandomWalk;
  return std::nullopt;
}

inline bool is_trainable(Preset p) {
  return p != Preset::AdamicAdar && p != Preset::RandomWalk;
}

inline ModelVariant variant_of(Preset p) {
  switch (p) {
    case Preset::Mf2:
    case Preset::Mfd: return ModelVariant::MfLinear;
    case Preset::Ae2:
    case Preset::Aed: return ModelVariant::Autoencoder;
    case Preset::MfAe: return ModelVariant::Joint;
    default:
      throw std::invalid_argument("variant_of: baseline preset has no model");
  }
}

inline constexpr double kDropoutKeepProb = 0.5;
inline constexpr double kL2WeightDecay = 1e-5;

/// Regularization settings of a trainable preset, applied onto a config.
/// Everything else (learning rate, epochs, seed, ...) is left untouched.
inline void apply_preset(Preset preset, TrainConfig& cfg) {
  switch (preset) {
    case Preset::Mf2:
    case Preset::Ae2:
      cfg.keep_prob_hidden = 1.0;
      cfg.keep_prob_input = 1.0;
      cfg.weight_decay = kL2WeightDecay;
      break;
    case Preset::Mfd:
      cfg.keep_prob_hidden = kDropoutKeepProb;
      cfg.keep_prob_input = 1.0;  // the factor branch has no input layer
      cfg.weight_decay = 0.0;
      break;
    case Preset::Aed:
    case Preset::MfAe:
      cfg.keep_prob_hidden = kDropoutKeepProb;
      cfg.keep_prob_input = kDropoutKeepProb;
      cfg.weight_decay = 0.0;
      break;
    default:
      throw std::invalid_argument("apply_preset: baseline preset has no training");
  }
}

/// Display name recovered from trained parameters (variant + whether any
/// dropout was active), e.g. for CSV rows when only a checkpoint is known.
inline std::string preset_name_of(const ModelParams& p) {
  const bool dropout = p.keep_hidden < 1.0 || p.keep_input < 1.0;
  switch (p.variant) {
    case ModelVariant::MfLinear: return dropout ? "MFd" : "MF2";
    case ModelVariant::Autoencoder: return dropout ? "AEd" : "AE2";
    case ModelVariant::Joint: return "MF+AE";
  }
  return "?";
}

}  // namespace linkpred
