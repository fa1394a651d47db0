// Copyright 2026 The kgf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgf/grounding.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>

#include "json.hpp"
#include "kgf/errors.hpp"
#include "kgf/text.hpp"

namespace kgf::grounding {

using extraction::EavTriple;
using text::Token;

std::string to_string(MatchTechnique t) {
  switch (t) {
    case MatchTechnique::Exact: return "Exact";
    case MatchTechnique::Regex: return "Regex";
    case MatchTechnique::Fuzzy: return "Fuzzy";
    case MatchTechnique::NGram: return "NGram";
    case MatchTechnique::BooleanInference: return "BooleanInference";
    case MatchTechnique::CaseInsensitive: return "CaseInsensitive";
    case MatchTechnique::NegationPattern: return "NegationPattern";
    case MatchTechnique::Lemma: return "Lemma";
    case MatchTechnique::Synonym: return "Synonym";
    case MatchTechnique::SentenceNegation: return "SentenceNegation";
    case MatchTechnique::TypoFix: return "TypoFix";
    case MatchTechnique::ExplicitFix: return "ExplicitFix";
  }
  return "Exact";
}

std::string to_string(MatchStatus s) {
  switch (s) {
    case MatchStatus::Grounded: return "Grounded";
    case MatchStatus::Rescued: return "Rescued";
    case MatchStatus::Hallucinated: return "Hallucinated";
  }
  return "Hallucinated";
}

GroundingConfig GroundingConfig::defaults() {
  GroundingConfig cfg;
  cfg.negation_cues = {"denies", "denied", "no",     "without",
                       "negative for",    "absent", "not"};
  cfg.synonyms = {
      {"tumor", {"neoplasm", "mass"}},
      {"neoplasm", {"tumor"}},
      {"mass", {"tumor"}},
      {"cancer", {"malignancy", "carcinoma"}},
      {"malignancy", {"cancer"}},
      {"hypertension", {"high blood pressure"}},
      {"high blood pressure", {"hypertension"}},
      {"shortness of breath", {"dyspnea"}},
  };
  cfg.lemma_suffix_rules = {
      {"tic", "sis"},  // diaphoretic -> diaphoresis
      {"ies", "y"},
      {"ing", ""},
      {"ic", ""},
  };
  cfg.irregular_lemmas = {
      {"dyspneic", "dyspnea"},
      {"febrile", "fever"},
      {"icteric", "jaundice"},
      {"anemic", "anemia"},
  };
  cfg.explicit_fixes = {
      {"smking", "smoking"},
      {"qd", "once daily"},
      {"bid", "twice daily"},
      {"ca199", "ca 19-9"},
  };
  return cfg;
}

namespace {

std::vector<std::string> read_table_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open table file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = text::trim(line);
    if (v.empty() || v[0] == '#') continue;
    lines.emplace_back(v);
  }
  return lines;
}

}  // namespace

void load_negation_cues(GroundingConfig& cfg, const std::string& path) {
  for (const std::string& line : read_table_lines(path)) {
    cfg.negation_cues.push_back(text::casefold(line));
  }
}

void load_synonyms(GroundingConfig& cfg, const std::string& path) {
  for (const std::string& line : read_table_lines(path)) {
    auto parts = text::split(line, '|');
    if (parts.size() < 2) continue;
    for (std::string& p : parts) p = text::casefold(text::trim(p));
    // Every member of the group maps to all the others.
    for (std::size_t i = 0; i < parts.size(); ++i) {
      auto& alts = cfg.synonyms[parts[i]];
      for (std::size_t j = 0; j < parts.size(); ++j) {
        if (i != j && std::find(alts.begin(), alts.end(), parts[j]) == alts.end()) {
          alts.push_back(parts[j]);
        }
      }
    }
  }
}

void load_lemma_rules(GroundingConfig& cfg, const std::string& path) {
  for (const std::string& line : read_table_lines(path)) {
    auto parts = text::split(line, '>');
    if (parts.size() != 2) continue;
    cfg.lemma_suffix_rules.emplace_back(std::string(text::trim(parts[0])),
                                        std::string(text::trim(parts[1])));
  }
  std::stable_sort(cfg.lemma_suffix_rules.begin(), cfg.lemma_suffix_rules.end(),
                   [](const auto& a, const auto& b) {
                     return a.first.size() > b.first.size();
                   });
}

void load_irregular_lemmas(GroundingConfig& cfg, const std::string& path) {
  for (const std::string& line : read_table_lines(path)) {
    auto parts = text::split(line, '|');
    if (parts.size() != 2) continue;
    cfg.irregular_lemmas[text::casefold(text::trim(parts[0]))] =
        text::casefold(text::trim(parts[1]));
  }
}

void load_explicit_fixes(GroundingConfig& cfg, const std::string& path) {
  for (const std::string& line : read_table_lines(path)) {
    auto parts = text::split(line, '|');
    if (parts.size() != 2) continue;
    cfg.explicit_fixes[text::casefold(text::trim(parts[0]))] =
        text::casefold(text::trim(parts[1]));
  }
}

std::size_t indel_distance(std::string_view a, std::string_view b) {
  // indel distance = |a| + |b| - 2*LCS(a, b); two-row LCS DP.
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  if (la == 0) return lb;
  if (lb == 0) return la;
  std::vector<std::size_t> prev(lb + 1, 0);
  std::vector<std::size_t> cur(lb + 1, 0);
  for (std::size_t i = 1; i <= la; ++i) {
    cur[0] = 0;
    for (std::size_t j = 1; j <= lb; ++j) {
      if (a[i - 1] == b[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  return la + lb - 2 * prev[lb];
}

double fuzzy_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 100.0;
  const std::size_t dist = indel_distance(a, b);
  return 100.0 * static_cast<double>(total - dist) / static_cast<double>(total);
}

std::string lemmatize_token(const std::string& token,
                            const GroundingConfig& cfg) {
  const std::string t = text::casefold(token);
  auto it = cfg.irregular_lemmas.find(t);
  if (it != cfg.irregular_lemmas.end()) return it->second;
  for (const auto& [suffix, replacement] : cfg.lemma_suffix_rules) {
    if (t.size() > suffix.size() + 2 &&
        t.compare(t.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return t.substr(0, t.size() - suffix.size()) + replacement;
    }
  }
  // Plural stripping, guarded against -ss/-is/-us forms ("diaphoresis",
  // "status", "mass" keep their s).
  if (t.size() > 3 && t.back() == 's') {
    const char prev = t[t.size() - 2];
    if (prev != 's' && prev != 'i' && prev != 'u') {
      return t.substr(0, t.size() - 1);
    }
  }
  return t;
}

namespace {

const std::set<std::string>& negative_values() {
  static const std::set<std::string> v = {"false", "absent", "no", "negative",
                                          "none"};
  return v;
}

const std::set<std::string>& positive_values() {
  static const std::set<std::string> v = {"true", "present", "yes", "positive"};
  return v;
}

enum class Polarity { Positive, Negative, None };

Polarity value_polarity(const std::string& value) {
  const std::string v = text::casefold(text::trim(value));
  if (negative_values().count(v)) return Polarity::Negative;
  if (positive_values().count(v)) return Polarity::Positive;
  return Polarity::None;
}

// Tokenized narrative view shared by the matching techniques.
struct NarrativeView {
  const corpus::ClinicalReport* report;
  std::vector<Token> tokens;
  std::vector<std::string> tokens_cf;
  std::vector<std::size_t> sentence_of;  // sentence index per token
  std::vector<std::size_t> cue_end_at;   // token indices ending a negation cue

  explicit NarrativeView(const corpus::ClinicalReport& r,
                         const GroundingConfig& cfg)
      : report(&r) {
    tokens = text::tokenize(r.narrative);
    tokens_cf.reserve(tokens.size());
    for (const Token& t : tokens) tokens_cf.push_back(text::casefold(t.text));

    sentence_of.assign(tokens.size(), 0);
    std::size_t s = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      while (s + 1 < r.sentences.size() && tokens[i].start >= r.sentences[s].end) {
        ++s;
      }
      sentence_of[i] = r.sentences.empty() ? 0 : s;
    }

    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (const std::string& cue : cfg.negation_cues) {
        const auto cue_tokens = text::split(cue, ' ');
        if (cue_tokens.empty()) continue;
        if (i + 1 < cue_tokens.size()) continue;
        const std::size_t first = i + 1 - cue_tokens.size();
        bool match = true;
        for (std::size_t k = 0; k < cue_tokens.size(); ++k) {
          if (tokens_cf[first + k] != cue_tokens[k]) {
            match = false;
            break;
          }
        }
        if (match) {
          cue_end_at.push_back(i);
          break;
        }
      }
    }
  }

  bool same_sentence(std::size_t i, std::size_t j) const {
    return sentence_of[i] == sentence_of[j];
  }

  // A cue governs token k when it ends within `scope` tokens to k's left
  // inside the same sentence.
  bool governed(std::size_t k, int scope) const {
    for (std::size_t cue : cue_end_at) {
      if (cue < k && k - cue <= static_cast<std::size_t>(scope) &&
          same_sentence(cue, k)) {
        return true;
      }
    }
    return false;
  }

  // First contiguous occurrence of the casefolded token sequence.
  std::optional<std::pair<std::size_t, std::size_t>> find_token_seq(
      const std::vector<std::string>& seq_cf, std::size_t from = 0) const {
    if (seq_cf.empty() || seq_cf.size() > tokens.size()) return std::nullopt;
    for (std::size_t i = from; i + seq_cf.size() <= tokens.size(); ++i) {
      bool ok = true;
      for (std::size_t k = 0; k < seq_cf.size(); ++k) {
        if (tokens_cf[i + k] != seq_cf[k]) {
          ok = false;
          break;
        }
      }
      if (ok) return std::make_pair(i, i + seq_cf.size());
    }
    return std::nullopt;
  }

  std::pair<std::size_t, std::size_t> char_span(std::size_t first_tok,
                                                std::size_t end_tok) const {
    return {tokens[first_tok].start, tokens[end_tok - 1].end};
  }
};

// Sub-terms of an attribute name: "observation_chills" -> {observation,
// chills}; keeps parts of length >= 3.
std::vector<std::string> attribute_parts(const std::string& attribute) {
  std::string norm = text::casefold(attribute);
  for (char& c : norm) {
    if (c == '_' || c == '-') c = ' ';
  }
  std::vector<std::string> parts;
  for (const std::string& p : text::tokenize_casefold(norm)) {
    if (p.size() >= 3) parts.push_back(p);
  }
  if (parts.empty() && !norm.empty()) {
    for (const std::string& p : text::tokenize_casefold(norm)) parts.push_back(p);
  }
  return parts;
}

MatchResult make_result(int stage, MatchTechnique technique,
                        std::pair<std::size_t, std::size_t> span, double score) {
  MatchResult r;
  r.stage = stage;
  r.technique = technique;
  r.matched_span = span;
  r.score = score;
  r.status = stage == 1 ? MatchStatus::Grounded : MatchStatus::Rescued;
  return r;
}

bool contains_digit(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

// Value pattern tolerant of spacing: "1.2 mg/dL" also matches "1.2mg/dL".
std::string build_spacing_regex(std::string_view value) {
  static const std::string special = R"(\^$.|?*+()[]{})";
  std::string pattern;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      pattern += "\\s*";
      while (i + 1 < value.size() &&
             std::isspace(static_cast<unsigned char>(value[i + 1]))) {
        ++i;
      }
    } else if (special.find(c) != std::string::npos) {
      pattern += '\\';
      pattern += c;
    } else {
      pattern += c;
    }
  }
  return pattern;
}

std::optional<MatchResult> try_exact(const EavTriple& triple,
                                     const NarrativeView& view) {
  if (triple.value.empty()) return std::nullopt;
  const std::size_t pos = view.report->narrative.find(triple.value);
  if (pos == std::string::npos) return std::nullopt;
  return make_result(1, MatchTechnique::Exact,
                     {pos, pos + triple.value.size()}, 100.0);
}

std::optional<MatchResult> try_regex(const EavTriple& triple,
                                     const NarrativeView& view) {
  if (!contains_digit(triple.value)) return std::nullopt;
  std::regex re;
  try {
    re.assign(build_spacing_regex(triple.value));
  } catch (const std::regex_error&) {
    return std::nullopt;
  }
  std::smatch m;
  if (!std::regex_search(view.report->narrative, m, re)) return std::nullopt;
  const std::size_t pos = static_cast<std::size_t>(m.position(0));
  return make_result(1, MatchTechnique::Regex,
                     {pos, pos + static_cast<std::size_t>(m.length(0))}, 100.0);
}

std::optional<MatchResult> try_fuzzy(const EavTriple& triple,
                                     const NarrativeView& view,
                                     const GroundingConfig& cfg) {
  const std::string& value = triple.value;
  const std::string& narrative = view.report->narrative;
  if (value.empty() || narrative.empty()) return std::nullopt;
  const std::size_t lv = value.size();
  double best = cfg.tau_fuzzy;
  std::optional<std::pair<std::size_t, std::size_t>> best_span;
  const std::size_t lo =
      lv > static_cast<std::size_t>(cfg.fuzzy_window_slack)
          ? lv - static_cast<std::size_t>(cfg.fuzzy_window_slack)
          : 1;
  const std::size_t hi = lv + static_cast<std::size_t>(cfg.fuzzy_window_slack);
  for (std::size_t lw = lo; lw <= hi && lw <= narrative.size(); ++lw) {
    // Length alone can cap the ratio below the threshold.
    const double cap = 200.0 * static_cast<double>(std::min(lv, lw)) /
                       static_cast<double>(lv + lw);
    if (cap <= cfg.tau_fuzzy) continue;
    for (std::size_t start = 0; start + lw <= narrative.size(); ++start) {
      const double r =
          fuzzy_ratio(value, std::string_view(narrative).substr(start, lw));
      if (r > best) {
        best = r;
        best_span = {start, start + lw};
      }
    }
  }
  if (!best_span) return std::nullopt;
  return make_result(1, MatchTechnique::Fuzzy, *best_span, best);
}

std::optional<MatchResult> try_ngram(const EavTriple& triple,
                                     const NarrativeView& view,
                                     const GroundingConfig& cfg) {
  std::vector<std::string> vt;
  for (const Token& t : text::tokenize(triple.value)) vt.push_back(t.text);
  if (vt.empty()) return std::nullopt;
  const std::set<std::string> vset(vt.begin(), vt.end());
  const std::size_t k = vt.size();

  double best = cfg.gamma_ngram;
  std::optional<std::pair<std::size_t, std::size_t>> best_span;
  for (std::size_t len = (k > 1 ? k - 1 : 1); len <= k + 1; ++len) {
    if (len > view.tokens.size()) break;
    for (std::size_t i = 0; i + len <= view.tokens.size(); ++i) {
      std::set<std::string> wset;
      for (std::size_t j = 0; j < len; ++j) wset.insert(view.tokens[i + j].text);
      std::size_t inter = 0;
      for (const std::string& w : wset) inter += vset.count(w);
      const std::size_t uni = vset.size() + wset.size() - inter;
      const double jac =
          uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
      if (jac > best) {
        best = jac;
        best_span = view.char_span(i, i + len);
      }
    }
  }
  if (!best_span) return std::nullopt;
  return make_result(1, MatchTechnique::NGram, *best_span, best * 100.0);
}

std::optional<MatchResult> try_boolean(const EavTriple& triple,
                                       const NarrativeView& view,
                                       const GroundingConfig& cfg) {
  const Polarity polarity = value_polarity(triple.value);
  if (polarity == Polarity::None) return std::nullopt;
  const std::vector<std::string> attr_seq =
      text::tokenize_casefold(triple.attribute);
  if (attr_seq.empty()) return std::nullopt;

  std::size_t from = 0;
  while (auto occ = view.find_token_seq(attr_seq, from)) {
    const bool governed = view.governed(occ->first, cfg.negation_scope_tokens);
    const bool wants_negated = polarity == Polarity::Negative;
    if (governed == wants_negated) {
      return make_result(1, MatchTechnique::BooleanInference,
                         view.char_span(occ->first, occ->second), 1.0);
    }
    from = occ->first + 1;
  }
  return std::nullopt;
}

std::optional<MatchResult> try_case_insensitive(const EavTriple& triple,
                                                const NarrativeView& view) {
  if (triple.value.empty()) return std::nullopt;
  const std::string hay = text::casefold(view.report->narrative);
  const std::string needle = text::casefold(triple.value);
  const std::size_t pos = hay.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  return make_result(2, MatchTechnique::CaseInsensitive,
                     {pos, pos + needle.size()}, 100.0);
}

std::optional<MatchResult> try_negation_pattern(const EavTriple& triple,
                                                const NarrativeView& view) {
  if (value_polarity(triple.value) != Polarity::Negative) return std::nullopt;
  const std::vector<std::string> parts = attribute_parts(triple.attribute);
  for (std::size_t k = 0; k < view.tokens.size(); ++k) {
    for (const std::string& part : parts) {
      if (view.tokens_cf[k] != part) continue;
      // Pattern shape: cue directly before the term ("denies X", "no X").
      const bool cue_adjacent =
          k > 0 && std::find(view.cue_end_at.begin(), view.cue_end_at.end(),
                             k - 1) != view.cue_end_at.end() &&
          view.same_sentence(k - 1, k);
      if (cue_adjacent) {
        return make_result(2, MatchTechnique::NegationPattern,
                           view.char_span(k, k + 1), 1.0);
      }
    }
  }
  return std::nullopt;
}

std::optional<MatchResult> try_lemma(const EavTriple& triple,
                                     const NarrativeView& view,
                                     const GroundingConfig& cfg) {
  std::vector<std::string> narrative_lemmas;
  narrative_lemmas.reserve(view.tokens_cf.size());
  for (const std::string& t : view.tokens_cf) {
    narrative_lemmas.push_back(lemmatize_token(t, cfg));
  }
  auto find_lemma_seq = [&](const std::vector<std::string>& seq)
      -> std::optional<std::pair<std::size_t, std::size_t>> {
    if (seq.empty() || seq.size() > narrative_lemmas.size()) return std::nullopt;
    for (std::size_t i = 0; i + seq.size() <= narrative_lemmas.size(); ++i) {
      bool ok = true;
      for (std::size_t k = 0; k < seq.size(); ++k) {
        if (narrative_lemmas[i + k] != seq[k]) {
          ok = false;
          break;
        }
      }
      if (ok) return std::make_pair(i, i + seq.size());
    }
    return std::nullopt;
  };

  // Value tokens, lemmatized.
  std::vector<std::string> value_lemmas;
  for (const std::string& t : text::tokenize_casefold(triple.value)) {
    value_lemmas.push_back(lemmatize_token(t, cfg));
  }
  const Polarity polarity = value_polarity(triple.value);
  if (polarity == Polarity::None) {
    if (auto occ = find_lemma_seq(value_lemmas)) {
      return make_result(2, MatchTechnique::Lemma,
                         view.char_span(occ->first, occ->second), 100.0);
    }
    return std::nullopt;
  }

  // Boolean-ish value: ground via the attribute term, honoring polarity.
  for (const std::string& part : attribute_parts(triple.attribute)) {
    const std::string lemma = lemmatize_token(part, cfg);
    for (std::size_t i = 0; i < narrative_lemmas.size(); ++i) {
      if (narrative_lemmas[i] != lemma) continue;
      const bool governed = view.governed(i, cfg.negation_scope_tokens);
      if (governed == (polarity == Polarity::Negative)) {
        return make_result(2, MatchTechnique::Lemma, view.char_span(i, i + 1),
                           100.0);
      }
    }
  }
  return std::nullopt;
}

std::optional<MatchResult> try_synonym(const EavTriple& triple,
                                       const NarrativeView& view,
                                       const GroundingConfig& cfg) {
  auto alternatives_of = [&](const std::string& term) {
    std::vector<std::string> alts;
    auto it = cfg.synonyms.find(text::casefold(term));
    if (it != cfg.synonyms.end()) alts = it->second;
    return alts;
  };
  auto match_phrase = [&](const std::string& phrase)
      -> std::optional<std::pair<std::size_t, std::size_t>> {
    const auto seq = text::tokenize_casefold(phrase);
    if (auto occ = view.find_token_seq(seq)) {
      return view.char_span(occ->first, occ->second);
    }
    return std::nullopt;
  };

  // Whole-value synonym swap.
  for (const std::string& alt : alternatives_of(triple.value)) {
    if (auto span = match_phrase(alt)) {
      return make_result(2, MatchTechnique::Synonym, *span, 100.0);
    }
  }
  // Single-token substitution inside the value.
  const auto value_tokens = text::tokenize_casefold(triple.value);
  for (std::size_t i = 0; i < value_tokens.size(); ++i) {
    for (const std::string& alt : alternatives_of(value_tokens[i])) {
      std::vector<std::string> seq;
      for (std::size_t j = 0; j < value_tokens.size(); ++j) {
        if (j == i) {
          for (const std::string& t : text::tokenize_casefold(alt)) {
            seq.push_back(t);
          }
        } else {
          seq.push_back(value_tokens[j]);
        }
      }
      if (auto occ = view.find_token_seq(seq)) {
        return make_result(2, MatchTechnique::Synonym,
                           view.char_span(occ->first, occ->second), 100.0);
      }
    }
  }
  // Boolean-ish value: attribute synonyms, polarity-guarded.
  const Polarity polarity = value_polarity(triple.value);
  if (polarity != Polarity::None) {
    for (const std::string& part : attribute_parts(triple.attribute)) {
      for (const std::string& alt : alternatives_of(part)) {
        const auto seq = text::tokenize_casefold(alt);
        if (auto occ = view.find_token_seq(seq)) {
          const bool governed =
              view.governed(occ->first, cfg.negation_scope_tokens);
          if (governed == (polarity == Polarity::Negative)) {
            return make_result(2, MatchTechnique::Synonym,
                               view.char_span(occ->first, occ->second), 100.0);
          }
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<MatchResult> try_sentence_negation(const EavTriple& triple,
                                                 const NarrativeView& view,
                                                 const GroundingConfig& cfg) {
  if (value_polarity(triple.value) != Polarity::Negative) return std::nullopt;
  std::vector<std::string> terms;
  for (const std::string& t : text::tokenize_casefold(triple.entity)) {
    if (t.size() >= 3) terms.push_back(t);
  }
  for (const std::string& p : attribute_parts(triple.attribute)) terms.push_back(p);

  // Best-matching narrative token across the triple's terms.
  double best = 70.0;  // fuzzy floor for locating the governed term
  std::optional<std::size_t> best_token;
  for (std::size_t i = 0; i < view.tokens_cf.size(); ++i) {
    for (const std::string& term : terms) {
      const double r = fuzzy_ratio(term, view.tokens_cf[i]);
      if (r > best) {
        best = r;
        best_token = i;
      }
    }
  }
  if (!best_token ||
      !view.governed(*best_token, cfg.negation_scope_tokens)) {
    return std::nullopt;
  }
  return make_result(3, MatchTechnique::SentenceNegation,
                     view.char_span(*best_token, *best_token + 1), 1.0);
}

std::optional<MatchResult> try_typo_fix(const EavTriple& triple,
                                        const NarrativeView& view,
                                        const GroundingConfig& cfg) {
  std::vector<std::string> vt;
  for (const Token& t : text::tokenize(triple.value)) vt.push_back(t.text);
  if (vt.empty() || vt.size() > view.tokens.size()) return std::nullopt;

  double best_min = cfg.tau_typo;
  std::optional<std::pair<std::size_t, std::size_t>> best_span;
  for (std::size_t i = 0; i + vt.size() <= view.tokens.size(); ++i) {
    double min_ratio = 101.0;
    bool skip = false;
    for (std::size_t k = 0; k < vt.size(); ++k) {
      // Dictionary-known typos belong to the explicit-fix technique.
      if (cfg.explicit_fixes.count(view.tokens_cf[i + k]) > 0) {
        skip = true;
        break;
      }
      min_ratio = std::min(min_ratio, fuzzy_ratio(vt[k], view.tokens[i + k].text));
      if (min_ratio <= best_min) break;
    }
    if (!skip && min_ratio > best_min) {
      best_min = min_ratio;
      best_span = view.char_span(i, i + vt.size());
    }
  }
  if (!best_span) return std::nullopt;
  return make_result(3, MatchTechnique::TypoFix, *best_span, best_min);
}

std::optional<MatchResult> try_explicit_fix(const EavTriple& triple,
                                            const NarrativeView& view,
                                            const GroundingConfig& cfg) {
  if (cfg.explicit_fixes.empty()) return std::nullopt;
  // Expand dictionary replacements into a patched token stream, each
  // patched token remembering its source token.
  std::vector<std::pair<std::string, std::size_t>> patched;  // (token_cf, orig)
  bool any_fix = false;
  for (std::size_t i = 0; i < view.tokens_cf.size(); ++i) {
    auto it = cfg.explicit_fixes.find(view.tokens_cf[i]);
    if (it == cfg.explicit_fixes.end()) {
      patched.emplace_back(view.tokens_cf[i], i);
    } else {
      any_fix = true;
      for (const std::string& t : text::tokenize_casefold(it->second)) {
        patched.emplace_back(t, i);
      }
    }
  }
  if (!any_fix) return std::nullopt;

  const auto seq = text::tokenize_casefold(triple.value);
  if (seq.empty() || seq.size() > patched.size()) return std::nullopt;
  for (std::size_t i = 0; i + seq.size() <= patched.size(); ++i) {
    bool ok = true;
    bool touches_fix = false;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (patched[i + k].first != seq[k]) {
        ok = false;
        break;
      }
      if (cfg.explicit_fixes.count(view.tokens_cf[patched[i + k].second]) > 0) {
        touches_fix = true;
      }
    }
    if (ok && touches_fix) {
      const std::size_t first = patched[i].second;
      const std::size_t last = patched[i + seq.size() - 1].second;
      return make_result(3, MatchTechnique::ExplicitFix,
                         view.char_span(first, last + 1), 100.0);
    }
  }
  return std::nullopt;
}

std::optional<MatchResult> run_stage1(const EavTriple& triple,
                                      const NarrativeView& view,
                                      const GroundingConfig& cfg) {
  if (auto r = try_exact(triple, view)) return r;
  if (auto r = try_regex(triple, view)) return r;
  if (auto r = try_fuzzy(triple, view, cfg)) return r;
  if (auto r = try_ngram(triple, view, cfg)) return r;
  if (auto r = try_boolean(triple, view, cfg)) return r;
  return std::nullopt;
}

std::optional<MatchResult> run_stage2(const EavTriple& triple,
                                      const NarrativeView& view,
                                      const GroundingConfig& cfg) {
  if (auto r = try_case_insensitive(triple, view)) return r;
  if (auto r = try_negation_pattern(triple, view)) return r;
  if (auto r = try_lemma(triple, view, cfg)) return r;
  if (auto r = try_synonym(triple, view, cfg)) return r;
  return std::nullopt;
}

std::optional<MatchResult> run_stage3(const EavTriple& triple,
                                      const NarrativeView& view,
                                      const GroundingConfig& cfg) {
  if (auto r = try_sentence_negation(triple, view, cfg)) return r;
  if (auto r = try_typo_fix(triple, view, cfg)) return r;
  if (auto r = try_explicit_fix(triple, view, cfg)) return r;
  return std::nullopt;
}

}  // namespace

std::optional<MatchResult> stage1_match(const EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg) {
  NarrativeView view(report, cfg);
  return run_stage1(triple, view, cfg);
}

std::optional<MatchResult> stage2_match(const EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg) {
  NarrativeView view(report, cfg);
  return run_stage2(triple, view, cfg);
}

std::optional<MatchResult> stage3_match(const EavTriple& triple,
                                        const corpus::ClinicalReport& report,
                                        const GroundingConfig& cfg) {
  NarrativeView view(report, cfg);
  return run_stage3(triple, view, cfg);
}

GroundingOutcome ground_triples(const std::vector<EavTriple>& triples,
                                const corpus::ClinicalReport& report,
                                const GroundingConfig& cfg, int max_stage) {
  NarrativeView view(report, cfg);
  GroundingOutcome outcome;
  outcome.report.patient_id = report.patient_id;
  outcome.report.triples = triples.size();

  for (std::size_t i = 0; i < triples.size(); ++i) {
    std::optional<MatchResult> r = run_stage1(triples[i], view, cfg);
    if (!r && max_stage >= 2) r = run_stage2(triples[i], view, cfg);
    if (!r && max_stage >= 3) r = run_stage3(triples[i], view, cfg);

    MatchResult result = r.value_or(MatchResult{});
    result.triple_index = i;
    outcome.results.push_back(result);

    switch (result.status) {
      case MatchStatus::Grounded: ++outcome.report.grounded; break;
      case MatchStatus::Rescued: ++outcome.report.rescued; break;
      case MatchStatus::Hallucinated: ++outcome.report.hallucinated; break;
    }
    if (result.technique) {
      ++outcome.report.per_technique_counts[to_string(*result.technique)];
    }
  }

  GroundingReport& rep = outcome.report;
  const double n = static_cast<double>(rep.triples);
  if (rep.triples > 0) {
    rep.coverage = static_cast<double>(rep.grounded) / n;
    rep.correctness_rate = static_cast<double>(rep.grounded + rep.rescued) / n;
    rep.hallucination_rate = static_cast<double>(rep.hallucinated) / n;
  }
  const std::size_t rescue_denom = rep.rescued + rep.hallucinated;
  rep.rescue_rate = rescue_denom == 0
                        ? 0.0
                        : static_cast<double>(rep.rescued) /
                              static_cast<double>(rescue_denom);
  return outcome;
}

std::string to_json(const GroundingOutcome& outcome) {
  nlohmann::json doc;
  doc["patient_id"] = outcome.report.patient_id;
  doc["totals"] = {{"triples", outcome.report.triples},
                   {"grounded", outcome.report.grounded},
                   {"rescued", outcome.report.rescued},
                   {"hallucinated", outcome.report.hallucinated}};
  doc["coverage"] = outcome.report.coverage;
  doc["correctness_rate"] = outcome.report.correctness_rate;
  doc["hallucination_rate"] = outcome.report.hallucination_rate;
  doc["rescue_rate"] = outcome.report.rescue_rate;
  doc["per_technique_counts"] = outcome.report.per_technique_counts;
  nlohmann::json arr = nlohmann::json::array();
  for (const MatchResult& r : outcome.results) {
    nlohmann::json rec;
    rec["triple_index"] = r.triple_index;
    rec["status"] = to_string(r.status);
    rec["score"] = r.score;
    if (r.stage) rec["stage"] = *r.stage;
    if (r.technique) rec["technique"] = to_string(*r.technique);
    if (r.matched_span) rec["span"] = {r.matched_span->first, r.matched_span->second};
    arr.push_back(std::move(rec));
  }
  doc["matches"] = std::move(arr);
  return doc.dump(2) + "\n";
}

std::vector<MatchStatus> statuses_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad grounding artifact: ") + e.what());
  }
  std::vector<MatchStatus> out;
  for (const auto& rec : doc.value("matches", nlohmann::json::array())) {
    const std::string s = rec.value("status", "Hallucinated");
    out.push_back(s == "Grounded"  ? MatchStatus::Grounded
                  : s == "Rescued" ? MatchStatus::Rescued
                                   : MatchStatus::Hallucinated);
  }
  return out;
}

GroundingReport report_from_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad grounding artifact: ") + e.what());
  }
  GroundingReport rep;
  rep.patient_id = doc.value("patient_id", "");
  rep.triples = doc["totals"].value("triples", 0u);
  rep.grounded = doc["totals"].value("grounded", 0u);
  rep.rescued = doc["totals"].value("rescued", 0u);
  rep.hallucinated = doc["totals"].value("hallucinated", 0u);
  rep.coverage = doc.value("coverage", 0.0);
  rep.correctness_rate = doc.value("correctness_rate", 0.0);
  rep.hallucination_rate = doc.value("hallucination_rate", 0.0);
  rep.rescue_rate = doc.value("rescue_rate", 0.0);
  if (doc.contains("per_technique_counts")) {
    for (auto it = doc["per_technique_counts"].begin();
         it != doc["per_technique_counts"].end(); ++it) {
      rep.per_technique_counts[it.key()] = it.value().get<std::size_t>();
    }
  }
  return rep;
}

}  // namespace kgf::grounding
