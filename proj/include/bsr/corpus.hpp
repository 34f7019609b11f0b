#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsr/types.hpp"

namespace bsr {

// A generated corpus: prompt instances plus (for identity-bearing corpora)
// the sample grouping. Instances are in canonical order:
// (law, situation, identity type, roster index).
struct Dataset {
    std::vector<PromptInstance> instances;
    std::vector<Sample> samples;  // empty for identity-stripped corpora
};

struct SplitResult {
    Dataset train;
    Dataset validation;
};

// Renders one prompt. Passing identity == nullptr produces the
// identity-stripped variant: <NAME> becomes the literal "X" and the
// <IDENTITY> clause is removed along with its surrounding punctuation.
std::string render_prompt(const LawEntry& law, const Situation& situation,
                          const Identity* identity, const std::string& name,
                          const PromptTemplate& tmpl);

// Deterministic name pick for one instance: uniform over the identity's
// name list, keyed by (seed, sample_id, identity_key).
const std::string& pick_name(const Identity& identity, std::uint64_t seed,
                             const std::string& sample_id);

Label label_of(const LawEntry& law, const Situation& situation);

// One sample per (law, situation, roster): K instances, one per identity.
Dataset generate_with_id(const CorpusConfig& config);
Dataset generate_with_id(const CorpusConfig& config, std::uint64_t seed);

// One instance per distinct (law, situation) pair, identity stripped.
Dataset generate_without_id(const CorpusConfig& config);

// Partitions a dataset into train/validation. Identity-bearing datasets are
// split at sample granularity (a sample never straddles the boundary);
// stripped datasets at instance granularity. Deterministic given seed.
SplitResult split_dataset(const Dataset& dataset, const SplitSpec& spec, std::uint64_t seed);

void write_instances_jsonl(const std::string& path, const std::vector<PromptInstance>& instances);
std::vector<PromptInstance> read_instances_jsonl(const std::string& path);

void write_samples_jsonl(const std::string& path, const std::vector<Sample>& samples);
std::vector<Sample> read_samples_jsonl(const std::string& path);

}  // namespace bsr
