#include "branchscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "branchscope/error.hpp"
#include "branchscope/stemmer.hpp"
#include "branchscope/textprep.hpp"

namespace branchscope::synth {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  bool chance(double p) { return uniform() < p; }

  // Index drawn from cumulative weights.
  std::size_t pick(const std::vector<double>& cumulative) {
    double u = uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
  }

 private:
  std::mt19937_64 engine_;
};

// Word list with Zipf-like sampling weights.
struct Topic {
  std::vector<std::string> words;
  std::vector<double> cumulative;

  const std::string& draw(Rng& rng) const { return words[rng.pick(cumulative)]; }
};

Topic make_topic(std::vector<std::string> words) {
  Topic t;
  t.words = std::move(words);
  double acc = 0.0;
  for (std::size_t i = 0; i < t.words.size(); ++i) {
    acc += 1.0 / std::pow(static_cast<double>(i + 1), 0.8);
    t.cumulative.push_back(acc);
  }
  return t;
}

// Pronounceable pseudo-words that survive tokenization and stemming unchanged.
std::vector<std::string> make_words(std::size_t count, Rng& rng, std::set<std::string>& used) {
  static constexpr std::string_view consonants = "bdfgklmnprstvz";
  static constexpr std::string_view vowels = "aeiou";
  static constexpr std::string_view finals = "kmnprt";
  const auto stop = TokenPipelineConfig::standard().stopwords;
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(consonants.size())];
      w += vowels[rng.below(vowels.size())];
    }
    w += finals[rng.below(finals.size())];
    if (porter_stem(w) != w || stop.contains(w) || !used.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<double> cumulative_of(const std::vector<std::pair<std::string, double>>& mix) {
  std::vector<double> c;
  double acc = 0.0;
  for (const auto& [region, w] : mix) {
    if (w < 0.0) throw ConfigError("negative region weight for " + region);
    acc += w;
    c.push_back(acc);
  }
  if (c.empty() || !(acc > 0.0)) throw ConfigError("region mix is empty");
  return c;
}

const char* country_name(std::string_view code) {
  static const std::map<std::string_view, const char*> names = {
      {"CN", "Peoples R China"}, {"US", "USA"},       {"DE", "Germany"},   {"JP", "Japan"},
      {"GB", "England"},         {"KR", "South Korea"}, {"FR", "France"},  {"IN", "India"},
      {"IR", "Iran"},            {"SG", "Singapore"}, {"TW", "Taiwan"},    {"IT", "Italy"},
      {"ES", "Spain"},           {"RU", "Russia"},
  };
  auto it = names.find(code);
  return it == names.end() ? nullptr : it->second;
}

Affiliation make_affiliation(const std::string& region, std::size_t n) {
  const char* country = country_name(region);
  Affiliation a;
  a.raw = "Inst " + std::to_string(n % 97) + ", " + (country ? country : region.c_str());
  // Regions without a bundled country name are passed as codes.
  if (!country) a.region = region;
  return a;
}

std::string make_text(std::size_t tokens, const std::vector<std::pair<const Topic*, double>>& sources, Rng& rng) {
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& s : sources) cumulative.push_back(acc += s.second);
  std::string text;
  for (std::size_t i = 0; i < tokens; ++i) {
    if (i) text += ' ';
    text += sources[rng.pick(cumulative)].first->draw(rng);
  }
  return text;
}

// Largest-remainder rounding of weights to integer counts summing to total.
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double exact = weights[i] / sum * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - std::floor(exact), i});
  }
  std::sort(remainders.begin(), remainders.end(), [](auto& a, auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

}  // namespace

double t_share(const Params& params, int year) {
  if (params.last_year == params.first_year) return params.t_share_first;
  const double f = static_cast<double>(year - params.first_year) / static_cast<double>(params.last_year - params.first_year);
  return params.t_share_first + f * (params.t_share_last - params.t_share_first);
}

std::pair<double, double> expected_group_dependency(const Params& params, double r) {
  const double ct = params.cite_t_from_t;
  const double ca = params.cite_t_from_a;
  const double rho = params.root_rate;
  const double alpha = (1.0 - r) * (1.0 - rho);
  const double bt = r * ct + (1.0 - r) * ct * rho;
  const double ba = r * ca + (1.0 - r) * ca * rho;
  // [1 - alpha ct, -alpha (1 - ct); -alpha ca, 1 - alpha (1 - ca)] x = b
  const double m11 = 1.0 - alpha * ct, m12 = -alpha * (1.0 - ct);
  const double m21 = -alpha * ca, m22 = 1.0 - alpha * (1.0 - ca);
  const double det = m11 * m22 - m12 * m21;
  return {(bt * m22 - m12 * ba) / det, (m11 * ba - m21 * bt) / det};
}

Corpus generate(const Params& params) {
  if (params.documents == 0) throw ConfigError("synthetic corpus needs at least one document");
  if (params.last_year < params.first_year) throw ConfigError("last_year precedes first_year");
  if (params.a_subtopics == 0) throw ConfigError("need at least one A subtopic");
  Rng rng(params.seed);

  std::set<std::string> used;
  const Topic t_topic = make_topic(make_words(params.t_words, rng, used));
  std::vector<Topic> a_topics;
  for (std::size_t s = 0; s < params.a_subtopics; ++s) a_topics.push_back(make_topic(make_words(params.a_subtopic_words, rng, used)));
  const Topic a_shared = make_topic(make_words(params.a_shared_words, rng, used));
  const Topic general = make_topic(make_words(params.general_words, rng, used));
  std::vector<std::string> all_a;
  for (const auto& t : a_topics) all_a.insert(all_a.end(), t.words.begin(), t.words.end());
  all_a.insert(all_a.end(), a_shared.words.begin(), a_shared.words.end());
  const Topic a_any = make_topic(all_a);

  const auto t_regions = cumulative_of(params.t_region_mix);
  const auto a_regions = cumulative_of(params.a_region_mix);

  // Documents per year with geometric growth, then exact per-year T quotas.
  std::vector<double> year_weights;
  for (int y = params.first_year; y <= params.last_year; ++y) {
    year_weights.push_back(std::pow(params.growth, y - params.first_year));
  }
  const auto per_year = apportion(year_weights, params.documents);

  Corpus out;
  auto& truth = out.truth;
  truth.t_anchor_word = t_topic.words.front();
  truth.t_vocabulary = t_topic.words;
  for (const auto& [r, w] : params.t_region_mix) truth.t_region_mix[r] += w / t_regions.back();
  for (const auto& [r, w] : params.a_region_mix) truth.a_region_mix[r] += w / a_regions.back();

  struct Doc {
    int year;
    Branch branch;
    std::size_t subtopic;
  };
  std::vector<Doc> docs;
  for (std::size_t yi = 0; yi < per_year.size(); ++yi) {
    const int year = params.first_year + static_cast<int>(yi);
    truth.t_share_by_year[year] = t_share(params, year);
    const auto n = per_year[yi];
    const auto n_t = static_cast<std::size_t>(std::llround(t_share(params, year) * static_cast<double>(n)));
    std::vector<Doc> year_docs;
    for (std::size_t i = 0; i < n; ++i) {
      year_docs.push_back({year, i < n_t ? Branch::T : Branch::A, rng.below(params.a_subtopics)});
    }
    std::shuffle(year_docs.begin(), year_docs.end(), std::mt19937_64(params.seed * 7919 + yi));
    docs.insert(docs.end(), year_docs.begin(), year_docs.end());
  }

  // Low-discrepancy lead-region assignment keeps realized shares near the mix.
  const double golden = 0.6180339887498949;
  double phase[2] = {0.5, 0.5};

  std::vector<std::size_t> earlier[2];  // earlier documents by branch
  std::vector<Record> records;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto& d = docs[i];
    const bool is_t = d.branch == Branch::T;
    Record r;
    char id[16];
    std::snprintf(id, sizeof id, "S%06zu", i + 1);
    r.id = id;
    r.doi = "10.5555/syn." + std::to_string(i + 1);
    r.year = d.year;
    r.doc_type = "Article";

    std::vector<std::pair<const Topic*, double>> sources;
    if (is_t) {
      sources = {{&t_topic, params.own_topic_rate}, {&a_any, params.other_branch_rate},
                 {&general, 1.0 - params.own_topic_rate - params.other_branch_rate}};
    } else {
      sources = {{&a_topics[d.subtopic], params.own_topic_rate * 0.65},
                 {&a_shared, params.own_topic_rate * 0.35},
                 {&t_topic, params.other_branch_rate},
                 {&general, 1.0 - params.own_topic_rate - params.other_branch_rate}};
    }
    r.title = make_text(params.title_tokens, sources, rng);
    r.abstract = make_text(params.abstract_tokens, sources, rng);

    const auto& mix = is_t ? params.t_region_mix : params.a_region_mix;
    const auto& cumulative = is_t ? t_regions : a_regions;
    auto& ph = phase[is_t ? 0 : 1];
    ph = std::fmod(ph + golden, 1.0);
    const auto lead = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), ph * cumulative.back()) - cumulative.begin());
    const std::string& lead_region = mix[std::min(lead, mix.size() - 1)].first;
    const bool collaboration = rng.chance(params.collaboration_rate);
    const std::size_t n_authors = collaboration ? 2 + rng.below(3) : 1 + rng.below(5);
    for (std::size_t a = 0; a < n_authors; ++a) {
      Author author;
      author.name = "Author " + std::to_string(i) + "-" + std::to_string(a);
      const std::size_t n_aff = 1 + rng.below(2);
      for (std::size_t k = 0; k < n_aff; ++k) {
        const std::string& region = collaboration ? mix[rng.pick(cumulative)].first : lead_region;
        author.affiliations.push_back(make_affiliation(region, i + a + k));
      }
      r.authors.push_back(std::move(author));
    }

    const bool root = i < params.forced_roots || rng.chance(params.root_rate);
    if (!root) {
      const double p_t = is_t ? params.cite_t_from_t : params.cite_t_from_a;
      std::set<std::size_t> chosen;
      std::size_t attempts = 0;
      while (chosen.size() < params.references_per_paper && attempts++ < 50 * params.references_per_paper) {
        int b = rng.chance(p_t) ? 0 : 1;
        if (earlier[b].empty()) b = 1 - b;
        chosen.insert(earlier[b][rng.below(earlier[b].size())]);
      }
      for (auto target : chosen) {
        // Mix reference styles: ids, DOIs, and upper-cased DOIs.
        switch (rng.below(3)) {
          case 0: r.references.push_back(records[target].id); break;
          case 1: r.references.push_back(*records[target].doi); break;
          default: {
            std::string doi = "https://doi.org/" + *records[target].doi;
            std::transform(doi.begin(), doi.end(), doi.begin(), [](unsigned char c) { return std::toupper(c); });
            r.references.push_back(doi);
          }
        }
      }
    }
    for (std::size_t e = 0; e < params.external_references; ++e) {
      r.references.push_back("10.9999/ext." + std::to_string(rng.below(100000)));
    }
    earlier[is_t ? 0 : 1].push_back(i);
    truth.ids.push_back(r.id);
    truth.branches.push_back(d.branch);
    records.push_back(std::move(r));
  }

  // Records the article filter must drop, interleaved deterministically.
  const auto extra = static_cast<std::size_t>(std::llround(params.excluded_rate * static_cast<double>(params.documents)));
  std::vector<Record> all;
  all.reserve(records.size() + extra);
  const std::size_t stride = extra ? std::max<std::size_t>(1, records.size() / extra) : 0;
  std::size_t made = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    all.push_back(records[i]);
    if (stride && made < extra && (i + 1) % stride == 0) {
      Record x = records[i];
      x.id = "X" + std::to_string(made + 1);
      x.doi = "10.5555/excluded." + std::to_string(made + 1);
      x.references.clear();
      switch (made % 4) {
        case 0: x.doc_type = "Review"; break;
        case 1: x.doc_type = "Proceedings Paper"; break;
        case 2: x.doi.reset(); break;
        default: x.year.reset(); break;
      }
      all.push_back(std::move(x));
      ++made;
    }
  }
  out.records = std::move(all);
  return out;
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

void write_truth(const std::filesystem::path& path, const Params& params, const Truth& truth, double r) {
  nlohmann::json j;
  j["seed"] = params.seed;
  j["documents"] = params.documents;
  j["t_anchor_word"] = truth.t_anchor_word;
  nlohmann::json shares;
  for (const auto& [y, s] : truth.t_share_by_year) shares[std::to_string(y)] = s;
  j["t_share_by_year"] = shares;
  j["t_region_mix"] = truth.t_region_mix;
  j["a_region_mix"] = truth.a_region_mix;
  auto [xt, xa] = expected_group_dependency(params, r);
  j["expected_dependency"] = {{"r", r}, {"T_group_D_T", xt}, {"A_group_D_T", xa}};
  nlohmann::json labels;
  for (std::size_t i = 0; i < truth.ids.size(); ++i) labels[truth.ids[i]] = std::string(to_string(truth.branches[i]));
  j["branches"] = labels;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace branchscope::synth
