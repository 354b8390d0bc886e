#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sarplan/corpus.hpp"

namespace sarplan::corpus {

// Planted behavior of one synthetic observer. Report displacement from the
// found location is isotropic with distance drawn uniformly from [0, radius].
struct SynthObserver {
  std::string id;
  double radius = 1.0;
  double participation = 1.0;      // probability of reporting in a case
  double state_prob = 0.0;         // probability of also stating a status
  double state_accuracy = 1.0;     // probability a stated status is correct
};

struct SynthConfig {
  int n_cases = 24;
  std::vector<SynthObserver> observers;
  double extent_miles = 10.0;             // found locations fall in this square
  geo::GeoPoint region_origin{34.0, -111.5};
  double p_alive = 0.3;
  double unlocated_fraction = 0.0;        // cases whose found location is withheld
  bool with_meta = false;

  void validate() const;  // throws ValidationError on nonpositive counts etc.
};

// Deterministic for a fixed (config, seed): the same call produces an
// identical corpus, byte for byte once serialized. The config itself is the
// planted ground truth; cmd_synth writes it next to the corpus for recovery
// experiments.
Corpus synth_generate(const SynthConfig& cfg, std::uint64_t seed);

std::string synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json(const std::string& text);

}  // namespace sarplan::corpus
