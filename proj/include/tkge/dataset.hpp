#pragma once
// Dataset loading, deterministic splitting, statistics.
//
// On-disk format: one fact per line, four delimiter-separated fields
//   head <tab> relation <tab> tail <tab> date
// Lines starting with '#' are skipped. Dates are ISO-8601 by default.

#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tkge/core.hpp"

namespace tkge {

struct DatasetManifest {
  // Explicit mode: three files. Single-file mode: one file plus ratios.
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string single_path;
  std::array<double, 3> ratios = {0.9, 0.05, 0.05};
  std::uint64_t seed = 0;
  std::string date_format = "%Y-%m-%d";
  char delimiter = '\t';
  bool split_by_time = false;
  Date cut_date;

  bool explicit_splits() const { return !train_path.empty(); }
};

inline std::vector<RawQuadruple> load_tsv(const std::string& path,
                                          const DatasetManifest& manifest = {}) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset file: " + path);
  }
  std::vector<RawQuadruple> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(manifest.delimiter, start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 4) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": expected 4 fields, got " +
                               std::to_string(fields.size()));
    }
    RawQuadruple q;
    q.head = fields[0];
    q.relation = fields[1];
    q.tail = fields[2];
    try {
      q.date = parse_date(fields[3], manifest.date_format);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    out.push_back(std::move(q));
  }
  return out;
}

inline void save_tsv(const std::string& path,
                     const std::vector<RawQuadruple>& quads,
                     char delimiter = '\t') {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write dataset file: " + path);
  }
  for (const auto& q : quads) {
    out << q.head << delimiter << q.relation << delimiter << q.tail
        << delimiter << format_date(q.date) << '\n';
  }
}

struct SplitResult {
  std::vector<RawQuadruple> train;
  std::vector<RawQuadruple> valid;
  std::vector<RawQuadruple> test;
  int moved_for_closure = 0;  // valid/test facts relocated into train
};

namespace detail {

// Moves valid/test facts whose entities or relations never occur in train
// into train. The models cannot score ids they have never been trained on.
inline int enforce_closure(SplitResult& s) {
  std::unordered_set<std::string> ents, rels;
  for (const auto& q : s.train) {
    ents.insert(q.head);
    ents.insert(q.tail);
    rels.insert(q.relation);
  }
  int moved = 0;
  for (auto* split : {&s.valid, &s.test}) {
    std::vector<RawQuadruple> kept;
    kept.reserve(split->size());
    for (auto& q : *split) {
      if (ents.count(q.head) && ents.count(q.tail) && rels.count(q.relation)) {
        kept.push_back(std::move(q));
      } else {
        ents.insert(q.head);
        ents.insert(q.tail);
        rels.insert(q.relation);
        s.train.push_back(std::move(q));
        ++moved;
      }
    }
    *split = std::move(kept);
  }
  return moved;
}

inline void check_ratios(const std::array<double, 3>& ratios) {
  for (double r : ratios) {
    if (r <= 0.0) throw std::invalid_argument("split ratios must be positive");
  }
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1, got " +
                                std::to_string(sum));
  }
}

inline void check_nonempty_splits(const SplitResult& s) {
  if (s.valid.empty() || s.test.empty() || s.train.empty()) {
    throw std::runtime_error(
        "dataset too small: a split is empty after closure adjustment "
        "(train=" +
        std::to_string(s.train.size()) +
        ", valid=" + std::to_string(s.valid.size()) +
        ", test=" + std::to_string(s.test.size()) + ")");
  }
}

}  // namespace detail

// Deterministic shuffled split. Valid/test sizes are floor(n * ratio); the
// remainder goes to train. Closure is enforced afterwards.
inline SplitResult split(const std::vector<RawQuadruple>& quads,
                         const std::array<double, 3>& ratios,
                         std::uint64_t seed) {
  detail::check_ratios(ratios);
  std::vector<std::size_t> order(quads.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = quads.size();
  const auto n_valid = static_cast<std::size_t>(ratios[1] * double(n));
  const auto n_test = static_cast<std::size_t>(ratios[2] * double(n));

  SplitResult out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = quads[order[i]];
    if (i < n - n_valid - n_test) {
      out.train.push_back(q);
    } else if (i < n - n_test) {
      out.valid.push_back(q);
    } else {
      out.test.push_back(q);
    }
  }
  out.moved_for_closure = detail::enforce_closure(out);
  detail::check_nonempty_splits(out);
  return out;
}

// Chronological split: train is every fact dated strictly before the cut,
// the rest is shuffled into valid/test proportionally to their ratios.
inline SplitResult split_by_time(const std::vector<RawQuadruple>& quads,
                                 const Date& cut,
                                 const std::array<double, 3>& ratios,
                                 std::uint64_t seed) {
  detail::check_ratios(ratios);
  SplitResult out;
  std::vector<RawQuadruple> later;
  for (const auto& q : quads) {
    if (q.date < cut) {
      out.train.push_back(q);
    } else {
      later.push_back(q);
    }
  }
  std::vector<std::size_t> order(later.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const double valid_share = ratios[1] / (ratios[1] + ratios[2]);
  const auto n_valid = static_cast<std::size_t>(valid_share * double(later.size()));
  for (std::size_t i = 0; i < later.size(); ++i) {
    (i < n_valid ? out.valid : out.test).push_back(later[order[i]]);
  }
  out.moved_for_closure = detail::enforce_closure(out);
  detail::check_nonempty_splits(out);
  return out;
}

// Loads a manifest into a graph. Explicit train/valid/test files win over
// single-file mode.
inline TemporalKG load_dataset(const DatasetManifest& manifest,
                               const KGOptions& options = {},
                               int* moved_for_closure = nullptr) {
  if (manifest.explicit_splits()) {
    auto train = load_tsv(manifest.train_path, manifest);
    auto valid = load_tsv(manifest.valid_path, manifest);
    auto test = load_tsv(manifest.test_path, manifest);
    if (moved_for_closure) *moved_for_closure = 0;
    return TemporalKG::from_raw(train, valid, test, options);
  }
  if (manifest.single_path.empty()) {
    throw std::invalid_argument(
        "manifest needs either train/valid/test paths or a single file");
  }
  auto all = load_tsv(manifest.single_path, manifest);
  SplitResult s = manifest.split_by_time
                      ? split_by_time(all, manifest.cut_date, manifest.ratios,
                                      manifest.seed)
                      : split(all, manifest.ratios, manifest.seed);
  if (moved_for_closure) *moved_for_closure = s.moved_for_closure;
  return TemporalKG::from_raw(s.train, s.valid, s.test, options);
}

// Resolves a --data argument: either a directory holding train.tsv /
// valid.tsv / test.tsv or a single TSV file.
inline DatasetManifest manifest_for_path(const std::string& data_path) {
  DatasetManifest m;
  namespace fs = std::filesystem;
  if (fs::is_directory(data_path)) {
    m.train_path = (fs::path(data_path) / "train.tsv").string();
    m.valid_path = (fs::path(data_path) / "valid.tsv").string();
    m.test_path = (fs::path(data_path) / "test.tsv").string();
  } else {
    m.single_path = data_path;
  }
  return m;
}

struct DatasetStats {
  std::int64_t n_entities = 0;
  std::int64_t n_relations = 0;
  std::int64_t n_train = 0;
  std::int64_t n_valid = 0;
  std::int64_t n_test = 0;
  std::int64_t n_timestamps = 0;
  std::string min_date;
  std::string max_date;
  double span_years = 0.0;
};

inline DatasetStats stats(const TemporalKG& kg) {
  DatasetStats s;
  s.n_entities = kg.n_entities();
  s.n_relations = kg.n_relations();
  s.n_train = static_cast<std::int64_t>(kg.train.size());
  s.n_valid = static_cast<std::int64_t>(kg.valid.size());
  s.n_test = static_cast<std::int64_t>(kg.test.size());
  s.n_timestamps = static_cast<std::int64_t>(kg.timestamps.size());
  if (!kg.timestamps.empty()) {
    s.min_date = format_date(kg.timestamps.front());
    s.max_date = format_date(kg.timestamps.back());
    s.span_years = timestamp_numeric(kg.timestamps.back(), kg.timestamps.front());
  }
  return s;
}

inline nlohmann::json stats_json(const DatasetStats& s) {
  return nlohmann::json{
      {"entities", s.n_entities},     {"relations", s.n_relations},
      {"train", s.n_train},           {"valid", s.n_valid},
      {"test", s.n_test},             {"quadruples", s.n_train + s.n_valid + s.n_test},
      {"timestamps", s.n_timestamps}, {"min_date", s.min_date},
      {"max_date", s.max_date},       {"span_years", s.span_years}};
}

}  // namespace tkge
