#pragma once

// Seeded generator for synthetic annotated corpora with controllable
// difficulty.  Sentences are built from templates of the form
//
//     pre + SLOT + mid + tail
//
// where SLOT holds exactly one tagged entity (and, depending on the template
// kind, an untagged decoy word next to it) and tail is the template's positive
// or negative variant.  The two tails share their first characters with the
// entity's local window, so the character actually signaling modality sits
// several positions away from the entity — a fixed-window emission model sees
// identical features for both modalities, while a whole-sentence encoder can
// use the distant cue.  Rare entities drawn from a generated pool appear only
// once or twice in a corpus but are present in the companion gazetteer, giving
// dictionary features something surface memorization cannot provide.

#include <cstdint>
#include <string>
#include <vector>

#include "dner/corpus.hpp"
#include "dner/gazetteer.hpp"

namespace dner {

enum class SlotKind {
  kSingle,  // pre ENTITY mid tail
  kPair,    // pre X connector Y mid tail  (one of X/Y is the entity)
  kAbut,    // pre XY mid tail             (entity and decoy adjacent)
};

struct SynthTemplate {
  std::string pre, mid, pos, neg;  // UTF-8; tails chosen by modality
  SlotKind slot = SlotKind::kSingle;
};

struct SynthEntity {
  std::string surface;  // UTF-8
  std::string code;
  bool in_gazetteer = true;
};

// Parameters for procedurally generated word pools.
struct WordPool {
  int count = 0;
  int min_len = 3, max_len = 5;
  std::string alphabet;  // UTF-8; characters drawn uniformly
};

struct SynthSpec {
  std::vector<SynthEntity> entities;  // common lexicon
  std::vector<std::string> decoys;    // explicit decoy words (UTF-8)
  WordPool rare_entities;             // generated; added to the gazetteer
  WordPool gen_decoys;                // generated; never in the gazetteer
  std::vector<SynthTemplate> templates;
  std::string connector = "と";
  std::string rare_code_prefix = "R";
  double n_ratio = 0.14;    // exact quota of entities tagged negative
  double rare_rate = 0.0;   // fraction of entity slots filled from the rare pool
  int min_sentences = 3, max_sentences = 5;  // per document, inclusive

  // Parses the JSON object format (see from_json_text) and validates.
  static SynthSpec from_json_text(const std::string& text);
  std::string to_json_text() const;
  void validate() const;  // throws DataError on an unusable spec
};

// Built-in specs.  `standard` keeps ambiguity low (held-out scores in the high
// nineties for the neural tagger); `adversarial` raises the rare-entity and
// decoy rates and adds abutting slots so dictionary features carry real weight.
const SynthSpec& standard_synth_spec();
const SynthSpec& adversarial_synth_spec();

struct SynthResult {
  std::vector<Document> docs;
  Gazetteer gazetteer;
};

// Deterministic for fixed (seed, n_docs, spec): documents, tags, and the
// companion gazetteer are reproducible byte-for-byte.  Generated corpora are
// fully annotated (char types and gazetteer codes attached).
SynthResult generate_synthetic(std::uint64_t seed, int n_docs,
                               const SynthSpec& spec);

}  // namespace dner
