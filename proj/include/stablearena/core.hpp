#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stablearena/error.hpp"

namespace stablearena {

// Opaque, non-empty identifier. Tag keeps model and annotator ids apart.
template <typename Tag>
class StrongId {
 public:
  StrongId() = default;
  explicit StrongId(std::string value) : value_(std::move(value)) {
    if (value_.empty()) throw InvalidArgument("identifier must be non-empty");
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const StrongId&, const StrongId&) = default;
  friend bool operator==(const StrongId&, const StrongId&) = default;

 private:
  std::string value_;
};

struct ModelTag {};
struct AnnotatorTag {};
using ModelId = StrongId<ModelTag>;
using AnnotatorId = StrongId<AnnotatorTag>;

// Battle result from the first model's side: 1 win, 0 loss, 0.5 tie.
class Outcome {
 public:
  constexpr Outcome() = default;
  // Throws InvalidArgument unless value is exactly 0, 0.5 or 1.
  explicit Outcome(double value);

  static constexpr Outcome first_wins() { return Outcome(Raw{1.0}); }
  static constexpr Outcome second_wins() { return Outcome(Raw{0.0}); }
  static constexpr Outcome tie() { return Outcome(Raw{0.5}); }

  constexpr double value() const noexcept { return value_; }
  constexpr bool is_tie() const noexcept { return value_ == 0.5; }
  // Outcome seen from the other side, W_ji = 1 - W_ij.
  constexpr Outcome swapped() const noexcept { return Outcome(Raw{1.0 - value_}); }

  friend constexpr bool operator==(Outcome, Outcome) = default;

 private:
  struct Raw {
    double v;
  };
  constexpr explicit Outcome(Raw r) : value_(r.v) {}
  double value_ = 0.5;
};

struct ComparisonRecord {
  ModelId first;
  ModelId second;
  AnnotatorId annotator;
  Outcome outcome;

  friend bool operator==(const ComparisonRecord&, const ComparisonRecord&) = default;
};

// Record resolved against the registries. Indices follow registry order.
struct IndexedRecord {
  std::uint32_t first;
  std::uint32_t second;
  std::uint32_t annotator;
  double outcome;
};

// Immutable battle log with model and annotator registries.
//
// Records are kept exactly as ingested (order matters for the sequential
// Elo pass). `canonical()` is the order-free view used by every batch
// reduction: records sorted by (first, second, annotator, outcome, insertion
// index), so any permutation of the input gives bit-identical sums.
class Dataset {
 public:
  Dataset() = default;

  // Registries are the sorted distinct ids referenced by the records.
  explicit Dataset(std::vector<ComparisonRecord> records);

  // Explicit registries. Records may reference unregistered ids or be
  // self-battles; such a dataset is not well_formed() and `validate` says why.
  // Duplicate registry entries throw InvalidArgument.
  Dataset(std::vector<ComparisonRecord> records, std::vector<ModelId> models,
          std::vector<AnnotatorId> annotators);

  const std::vector<ComparisonRecord>& records() const noexcept { return records_; }
  const std::vector<ModelId>& models() const noexcept { return models_; }
  const std::vector<AnnotatorId>& annotators() const noexcept { return annotators_; }

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  std::size_t n_models() const noexcept { return models_.size(); }
  std::size_t n_annotators() const noexcept { return annotators_.size(); }

  // Well-formed records only, in canonical order.
  std::span<const IndexedRecord> canonical() const noexcept { return canonical_; }
  // Same records in ingestion order.
  std::span<const IndexedRecord> indexed() const noexcept { return indexed_; }

  bool well_formed() const noexcept { return malformed_ == 0; }
  // Throws InvalidArgument when a record is a self-battle or references an
  // unregistered id.
  void require_well_formed() const;

  std::optional<std::size_t> model_index(const ModelId& id) const;
  std::optional<std::size_t> annotator_index(const AnnotatorId& id) const;

  // Records per annotator / per model (a battle counts for both sides).
  std::vector<std::size_t> annotator_counts() const;
  std::vector<std::size_t> model_counts() const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.records_ == b.records_ && a.models_ == b.models_ &&
           a.annotators_ == b.annotators_;
  }

 private:
  void build_index();

  std::vector<ComparisonRecord> records_;
  std::vector<ModelId> models_;
  std::vector<AnnotatorId> annotators_;
  std::vector<IndexedRecord> indexed_;
  std::vector<IndexedRecord> canonical_;
  std::size_t malformed_ = 0;
};

// Nats per rating point. The classic Elo scale is ln(10)/400.
class ScaleConstant {
 public:
  constexpr ScaleConstant() = default;
  explicit ScaleConstant(double c);
  static ScaleConstant natural() { return ScaleConstant(1.0); }
  static ScaleConstant elo();
  constexpr double value() const noexcept { return c_; }

 private:
  double c_ = 1.0;
};

enum class Anchor {
  MeanZero,  // gauge fixed by centering (MLE estimators)
  Initial,   // sequential Elo, offset from the initial rating
};

struct RatingVector {
  std::vector<ModelId> models;
  std::vector<double> values;
  Anchor anchor = Anchor::MeanZero;

  double at(const ModelId& id) const;
  std::size_t size() const noexcept { return values.size(); }

  friend bool operator==(const RatingVector&, const RatingVector&) = default;
};

// Shared by the gradient and Newton solvers of both MLE estimators.
struct OptimConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 2000;
  double grad_tol = 1e-8;  // early stop on the gradient max-norm
  double ridge = 0.0;      // optional L2 penalty on ratings

  void validate() const;
};

// Called after every epoch with the current ratings.
using EpochCallback = std::function<void(std::size_t epoch, std::span<const double> ratings)>;

// Logistic function evaluated on the sign-stable branch.
double sigmoid(double x) noexcept;
// W - sigmoid(z) without cancellation at saturated z.
double residual(double w, double z) noexcept;
// ln(p) with p clamped to [1e-12, 1 - 1e-12].
double clamped_log(double p) noexcept;

// 1 / (1 + exp(-c (r_i - r_j))). Throws InvalidArgument on non-finite input.
double win_prob(double r_i, double r_j, ScaleConstant c);

enum class IssueKind {
  SelfBattle,
  UnregisteredModel,
  UnregisteredAnnotator,
  TooFewModels,
  Disconnected,
};

struct ValidationIssue {
  IssueKind kind;
  std::string message;
  std::optional<std::size_t> record;  // index in ingestion order
};

struct ValidationReport {
  std::vector<ValidationIssue> errors;
  std::vector<ValidationIssue> warnings;
  std::size_t components = 0;

  bool ok() const noexcept { return errors.empty(); }
  bool clean() const noexcept { return errors.empty() && warnings.empty(); }
};

ValidationReport validate(const Dataset& dataset);

// Connected components of the comparison graph (models as nodes).
struct Components {
  std::vector<std::size_t> label;  // per model, in registry order
  std::size_t count = 0;
};
Components comparison_components(const Dataset& dataset);

// True when every component's "won or drew against" digraph is strongly
// connected, i.e. the unpenalized maximum-likelihood ratings exist.
bool mle_exists(const Dataset& dataset);

// Records of annotators with at least `delta` records. Annotators below the
// threshold leave the registry, as do models left without any record.
Dataset filter_min_records(const Dataset& dataset, std::size_t delta);

struct WinMatrix {
  std::vector<ModelId> models;
  std::vector<std::vector<std::size_t>> wins;  // wins[i][j]: i beat j
  std::vector<std::vector<std::size_t>> ties;  // symmetric
};
WinMatrix win_matrix(const Dataset& dataset);

namespace detail {
// Values of `ratings` in `dataset` registry order; InvalidArgument if a model
// is missing.
std::vector<double> aligned_ratings(const RatingVector& ratings, const Dataset& dataset);
}  // namespace detail

}  // namespace stablearena

template <typename Tag>
struct std::hash<stablearena::StrongId<Tag>> {
  std::size_t operator()(const stablearena::StrongId<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
