#pragma once
// Skill-demand trajectories: score candidate (job, relation, skill) facts
// over a time grid, aggregate, and emit CSV datasets for plotting.
//
// Scores are raw plausibilities on the trained model's own scale. Only
// within-model ordering and trends are meaningful; absolute values are not
// comparable across models and no calibration is applied.

#include <algorithm>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tkge/core.hpp"
#include "tkge/models.hpp"

namespace tkge {

enum class GridStep { Quarterly, Monthly, Yearly, Explicit };

inline GridStep parse_grid_step(const std::string& s) {
  if (s == "quarterly") return GridStep::Quarterly;
  if (s == "monthly") return GridStep::Monthly;
  if (s == "yearly") return GridStep::Yearly;
  throw std::invalid_argument("unknown grid step \"" + s +
                              "\"; valid: quarterly, monthly, yearly");
}

// Time grid over [start, end]. Interior points sit on calendar boundaries
// (quarterly: Jan/Apr/Jul/Oct 1st; monthly: 1st; yearly: Jan 1st); both
// endpoints are always included.
struct TimeGrid {
  Date start;
  Date end;
  GridStep step = GridStep::Quarterly;
  std::vector<Date> explicit_dates;

  std::vector<Date> points() const {
    if (step == GridStep::Explicit) {
      if (explicit_dates.empty()) {
        throw std::invalid_argument("explicit time grid is empty");
      }
      for (std::size_t i = 0; i + 1 < explicit_dates.size(); ++i) {
        if (!(explicit_dates[i] < explicit_dates[i + 1])) {
          throw std::invalid_argument(
              "explicit time grid must be strictly increasing");
        }
      }
      return explicit_dates;
    }
    if (end < start) {
      throw std::invalid_argument("time grid start " + format_date(start) +
                                  " is after end " + format_date(end));
    }
    std::vector<Date> out{start};
    if (start == end) return out;

    auto on_boundary = [this](int month) {
      switch (step) {
        case GridStep::Quarterly:
          return month == 1 || month == 4 || month == 7 || month == 10;
        case GridStep::Monthly:
          return true;
        case GridStep::Yearly:
          return month == 1;
        default:
          return false;
      }
    };
    Date cur{start.year, start.month, 1};
    while (cur < end) {
      if (start < cur && on_boundary(cur.month)) out.push_back(cur);
      cur.month += 1;
      if (cur.month > 12) {
        cur.month = 1;
        cur.year += 1;
      }
    }
    out.push_back(end);
    return out;
  }
};

struct CandidateFact {
  EntityId job;
  RelationId relation;
  EntityId skill;
};

// Cartesian product job x skills, optionally minus every pair already seen
// in the train split at any timestamp.
inline std::vector<CandidateFact> candidate_facts(
    EntityId job, RelationId relation, std::span<const EntityId> skills,
    const TemporalKG& kg, bool exclude_seen) {
  if (skills.empty()) {
    throw std::invalid_argument("candidate_facts: empty skill list");
  }
  std::set<std::pair<EntityId, EntityId>> seen;
  if (exclude_seen) {
    for (const auto& q : kg.train) {
      if (q.relation == relation) seen.insert({q.head, q.tail});
    }
  }
  std::vector<CandidateFact> out;
  for (EntityId s : skills) {
    if (!exclude_seen || !seen.count({job, s})) {
      out.push_back({job, relation, s});
    }
  }
  return out;
}

struct ForecastSeries {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = -1;  // -1 for the aggregate series
  bool is_aggregate = false;
  std::vector<Date> dates;
  std::vector<double> values;
};

// One plausibility series per skill over the grid.
template <class S>
std::vector<ForecastSeries> forecast(EntityId job, RelationId relation,
                                     std::span<const EntityId> skills,
                                     const TimeGrid& grid,
                                     const Model<S>& model) {
  if (skills.empty()) {
    throw std::invalid_argument("forecast: empty skill list");
  }
  const std::vector<Date> dates = grid.points();
  std::vector<ForecastSeries> out(skills.size());
  for (std::size_t s = 0; s < skills.size(); ++s) {
    out[s].head = job;
    out[s].relation = relation;
    out[s].tail = skills[s];
    out[s].dates = dates;
    out[s].values.resize(dates.size());
  }
  const EntityId head[] = {job};
  for (std::size_t di = 0; di < dates.size(); ++di) {
    Timestamp ts;
    ts.date = dates[di];
    const auto scores = model.score_batch(head, relation, skills, ts);
    for (std::size_t s = 0; s < skills.size(); ++s) {
      out[s].values[di] = static_cast<double>(scores[s]);
    }
  }
  return out;
}

// Pointwise mean over member series.
inline ForecastSeries aggregate_series(
    const std::vector<ForecastSeries>& members) {
  if (members.empty()) {
    throw std::invalid_argument("aggregate_series: no member series");
  }
  ForecastSeries agg;
  agg.head = members.front().head;
  agg.relation = members.front().relation;
  agg.is_aggregate = true;
  agg.dates = members.front().dates;
  agg.values.assign(agg.dates.size(), 0.0);
  for (const auto& s : members) {
    if (s.dates.size() != agg.dates.size()) {
      throw std::invalid_argument("aggregate_series: mismatched grids");
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      agg.values[i] += s.values[i];
    }
  }
  for (auto& v : agg.values) v /= static_cast<double>(members.size());
  return agg;
}

struct Heatmap {
  std::vector<EntityId> skills;  // row order: by mean score, descending
  std::vector<Date> dates;
  MatX<double> values;  // skills x dates
  bool truncated = false;
};

// Rows are the top_k skills ranked by mean plausibility over the grid,
// ties broken by smaller entity id. Asking for more rows than skills
// truncates and flags it.
template <class S>
Heatmap heatmap_matrix(EntityId job, RelationId relation,
                       std::span<const EntityId> skills, int top_k,
                       const TimeGrid& grid, const Model<S>& model) {
  if (top_k < 1) {
    throw std::invalid_argument("heatmap_matrix: top_k must be >= 1");
  }
  const auto series = forecast(job, relation, skills, grid, model);
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> means(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    means[i] =
        std::accumulate(series[i].values.begin(), series[i].values.end(), 0.0) /
        static_cast<double>(series[i].values.size());
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (means[a] != means[b]) return means[a] > means[b];
    return series[a].tail < series[b].tail;
  });

  Heatmap out;
  out.truncated = top_k > static_cast<int>(series.size());
  const std::size_t rows =
      std::min<std::size_t>(static_cast<std::size_t>(top_k), series.size());
  out.dates = series.front().dates;
  out.values.resize(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(out.dates.size()));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& s = series[order[i]];
    out.skills.push_back(s.tail);
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          s.values[j];
    }
  }
  return out;
}

// CSV with columns date, skill, score; the aggregate series, when present,
// is labeled "__mean__".
inline std::string series_csv(const std::vector<ForecastSeries>& series,
                              const Vocab& entities) {
  std::ostringstream os;
  os.precision(17);
  os << "date,skill,score\n";
  for (const auto& s : series) {
    const std::string label =
        s.is_aggregate ? "__mean__" : entities.name(s.tail);
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
      os << format_date(s.dates[i]) << ',' << label << ',' << s.values[i]
         << '\n';
    }
  }
  return os.str();
}

// First row: grid dates. First column: skill names. Cells: scores.
inline std::string heatmap_csv(const Heatmap& hm, const Vocab& entities) {
  std::ostringstream os;
  os.precision(17);
  os << "skill";
  for (const auto& d : hm.dates) os << ',' << format_date(d);
  os << '\n';
  for (std::size_t i = 0; i < hm.skills.size(); ++i) {
    os << entities.name(hm.skills[i]);
    for (Eigen::Index j = 0; j < hm.values.cols(); ++j) {
      os << ',' << hm.values(static_cast<Eigen::Index>(i), j);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace tkge
