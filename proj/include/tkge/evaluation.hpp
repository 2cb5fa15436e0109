#pragma once
// Filtered entity ranking and the MRR / Hits@k / MR metrics.
//
// For a test fact (h, r, t, ts) two queries are ranked: the head against
// every entity substituted into the head slot, and likewise the tail. A
// candidate is skipped when the substituted fact is a known true fact
// (member of the filter index); the true entity itself is never skipped.
// Candidates tied with the true score count against it.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkge/core.hpp"
#include "tkge/models.hpp"

namespace tkge {

enum class Slot { Head, Tail };

// Rank of the candidate at true_idx among scores, counting excluded
// candidates out. Pure so that monotone-transform and filter properties can
// be tested directly.
template <class S>
int rank_from_scores(std::span<const S> scores, std::size_t true_idx,
                     const std::vector<char>& excluded) {
  const S true_score = scores[true_idx];
  int worse_or_equal = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == true_idx || excluded[i]) continue;
    if (scores[i] >= true_score) ++worse_or_equal;
  }
  return worse_or_equal + 1;
}

template <class S>
int filtered_rank(const Quadruple& q, Slot slot, const Model<S>& model,
                  const FilterIndex& filter) {
  const int n = model.n_entities;
  std::vector<EntityId> candidates(static_cast<std::size_t>(n));
  std::iota(candidates.begin(), candidates.end(), 0);

  std::vector<S> scores;
  const std::int64_t serial = day_serial(q.ts.date);
  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  if (slot == Slot::Head) {
    const EntityId tail[] = {q.tail};
    scores = model.score_batch(candidates, q.relation, tail, q.ts);
    for (int e = 0; e < n; ++e) {
      excluded[e] = filter.contains(e, q.relation, q.tail, serial) ? 1 : 0;
    }
  } else {
    const EntityId head[] = {q.head};
    scores = model.score_batch(head, q.relation, candidates, q.ts);
    for (int e = 0; e < n; ++e) {
      excluded[e] = filter.contains(q.head, q.relation, e, serial) ? 1 : 0;
    }
  }
  const std::size_t true_idx =
      static_cast<std::size_t>(slot == Slot::Head ? q.head : q.tail);
  return rank_from_scores<S>(scores, true_idx, excluded);
}

struct RelationMetrics {
  double mrr = 0.0;
  std::int64_t n = 0;
};

struct EvaluationReport {
  double mrr = 0.0;
  double mr = 0.0;
  std::vector<int> ks;
  std::vector<double> hits;  // fractions in [0, 1], aligned with ks
  std::int64_t n_test = 0;
  std::map<RelationId, RelationMetrics> per_relation;

  double hits_at(int k) const {
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] == k) return hits[i];
    }
    throw std::out_of_range("no hits@" + std::to_string(k) + " in report");
  }
};

// Metrics from paired head/tail rank lists. Both queries of a fact count,
// so every sum is normalized by 2 * n_test.
inline EvaluationReport metrics_from_ranks(const std::vector<int>& head_ranks,
                                           const std::vector<int>& tail_ranks,
                                           const std::vector<int>& ks = {1, 3,
                                                                         10}) {
  if (head_ranks.empty() || head_ranks.size() != tail_ranks.size()) {
    throw std::invalid_argument("metrics need matching non-empty rank lists");
  }
  EvaluationReport rep;
  rep.ks = ks;
  rep.hits.assign(ks.size(), 0.0);
  rep.n_test = static_cast<std::int64_t>(head_ranks.size());
  const double denom = 2.0 * static_cast<double>(rep.n_test);
  for (std::size_t i = 0; i < head_ranks.size(); ++i) {
    for (int rank : {head_ranks[i], tail_ranks[i]}) {
      rep.mrr += 1.0 / static_cast<double>(rank);
      rep.mr += static_cast<double>(rank);
      for (std::size_t j = 0; j < ks.size(); ++j) {
        if (rank <= ks[j]) rep.hits[j] += 1.0;
      }
    }
  }
  rep.mrr /= denom;
  rep.mr /= denom;
  for (auto& h : rep.hits) h /= denom;
  return rep;
}

namespace detail {

inline void parallel_for(std::size_t n, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
  unsigned workers = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                   : std::thread::hardware_concurrency();
  if (workers == 0) workers = 1;
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n ? n : 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

template <class S>
EvaluationReport evaluate(const std::vector<Quadruple>& test,
                          const Model<S>& model, const FilterIndex& filter,
                          const std::vector<int>& ks = {1, 3, 10},
                          int n_threads = 0) {
  if (test.empty()) {
    throw std::invalid_argument("evaluate: empty test set");
  }
  std::vector<int> head_ranks(test.size()), tail_ranks(test.size());
  detail::parallel_for(test.size(), n_threads, [&](std::size_t i) {
    head_ranks[i] = filtered_rank(test[i], Slot::Head, model, filter);
    tail_ranks[i] = filtered_rank(test[i], Slot::Tail, model, filter);
  });

  EvaluationReport rep = metrics_from_ranks(head_ranks, tail_ranks, ks);
  for (std::size_t i = 0; i < test.size(); ++i) {
    auto& pr = rep.per_relation[test[i].relation];
    pr.mrr += 1.0 / head_ranks[i] + 1.0 / tail_ranks[i];
    pr.n += 1;
  }
  for (auto& [r, pr] : rep.per_relation) {
    pr.mrr /= 2.0 * static_cast<double>(pr.n);
  }
  return rep;
}

inline nlohmann::json report_json(const EvaluationReport& rep) {
  nlohmann::json j;
  j["mrr"] = rep.mrr;
  j["mr"] = rep.mr;
  j["n_test"] = rep.n_test;
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    j["hits@" + std::to_string(rep.ks[i])] = rep.hits[i];
  }
  if (!rep.per_relation.empty()) {
    nlohmann::json pr = nlohmann::json::array();
    for (const auto& [r, m] : rep.per_relation) {
      pr.push_back({{"relation", r}, {"mrr", m.mrr}, {"n", m.n}});
    }
    j["per_relation"] = pr;
  }
  return j;
}

// Aligned table, percentages with two decimals: Hit@1 Hit@3 Hit@10 MRR.
inline std::string report_table(const EvaluationReport& rep,
                                const std::string& model_name) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(14) << "Model" << std::right << std::setw(8)
     << "Hit@1" << std::setw(8) << "Hit@3" << std::setw(9) << "Hit@10"
     << std::setw(8) << "MRR" << '\n';
  os << std::left << std::setw(14) << model_name << std::right << std::setw(8)
     << 100.0 * rep.hits_at(1) << std::setw(8) << 100.0 * rep.hits_at(3)
     << std::setw(9) << 100.0 * rep.hits_at(10) << std::setw(8)
     << 100.0 * rep.mrr << '\n';
  return os.str();
}

}  // namespace tkge
