#include "framekit/registry.hpp"
#include "framekit/rng.hpp"

namespace framekit::classifier {
namespace {

using Pools = std::vector<std::pair<std::string, std::vector<std::string>>>;

// Shared newsroom filler; appears under every label so it carries no signal.
const std::vector<std::string> kFiller = {"report", "officials", "week", "city", "local", "news"};

const Pools kCovidPools = {
    {"Economic consequences",
     {"jobs", "unemployment", "economy", "market", "stocks", "recession", "business",
      "layoffs", "wages", "inflation", "retail", "budget"}},
    {"Prevention",
     {"masks", "distancing", "vaccine", "hygiene", "testing", "quarantine", "handwashing",
      "lockdown", "ventilation", "booster", "screening", "isolation"}},
};

const Pools kGunPools = {
    {"Gun control",
     {"background", "checks", "ban", "legislation", "permit", "registry", "assault",
      "regulation", "licensing", "waiting", "restriction", "reform"}},
    {"Gun rights",
     {"amendment", "constitution", "freedom", "ownership", "liberty", "hunting", "militia",
      "citizens", "selfdefense", "carry", "holster", "heritage"}},
    {"Mental health",
     {"counseling", "therapy", "psychiatric", "treatment", "depression", "trauma",
      "wellbeing", "clinician", "diagnosis", "support", "outreach", "crisis"}},
};

ClassifierModel build(const std::string& id, const std::string& issue, const Pools& pools,
                      std::uint64_t seed) {
  const auto corpus = synthetic_labeled_corpus(pools, 120, 10, seed);
  TrainConfig config;
  config.seed = seed;
  auto [train, test] = split_train_test(corpus, config);
  auto model = train_reference(train, test, config, textprep::PrepConfig{});
  model.model_id = id;
  model.issue_name = issue;
  return model;
}

}  // namespace

Corpus synthetic_labeled_corpus(const Pools& pools, std::size_t docs_per_label,
                                std::size_t doc_length, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<Document> docs;
  docs.reserve(pools.size() * docs_per_label);
  for (std::size_t i = 0; i < docs_per_label; ++i) {
    for (const auto& [label, words] : pools) {
      std::string text;
      for (std::size_t t = 0; t < doc_length; ++t) {
        if (!text.empty()) text.push_back(' ');
        // One token in five is filler.
        if (rng.below(5) == 0) {
          text += kFiller[rng.below(kFiller.size())];
        } else {
          text += words[rng.below(words.size())];
        }
      }
      docs.push_back({0, std::move(text), label});
    }
  }
  return Corpus(std::move(docs), "synthetic");
}

std::vector<std::string> demo_model_ids() { return {"demo-covid19", "demo-gun-violence"}; }

std::vector<ClassifierModel> build_demo_models() {
  std::vector<ClassifierModel> models;
  models.push_back(build("demo-covid19", "COVID-19 (synthetic demo)", kCovidPools, 1901));
  models.push_back(build("demo-gun-violence", "US gun violence (synthetic demo)", kGunPools, 1902));
  return models;
}

}  // namespace framekit::classifier
