#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sgnet/matrix.hpp"

namespace sgnet {

enum class Modality { Morphological, Functional };

std::string_view modality_name(Modality m);

/// Node counts of the three graphs every subject carries.
struct Resolutions {
    std::size_t source = 35;
    std::size_t target_lr = 160;
    std::size_t target_hr = 268;

    static Resolutions paper() { return {35, 160, 268}; }
    static Resolutions desk() { return {12, 24, 36}; }
    bool operator==(const Resolutions&) const = default;
};

inline constexpr double kSymmetryTolerance = 1e-9;

/// Throws ContractError unless `a` is square, finite, symmetric within
/// kSymmetryTolerance, zero on the diagonal and inside [0, 1].
void validate_adjacency(const Matrix& a, std::string_view what = "graph");

// Weighted undirected brain graph. The invariants are checked on
// construction, so every BrainGraph in the program is valid.
class BrainGraph {
public:
    BrainGraph() = default;
    BrainGraph(Matrix adjacency, Modality modality);

    const Matrix& adjacency() const noexcept { return adjacency_; }
    Modality modality() const noexcept { return modality_; }
    std::size_t resolution() const noexcept { return adjacency_.rows(); }

    bool operator==(const BrainGraph&) const = default;

private:
    Matrix adjacency_;
    Modality modality_ = Modality::Functional;
};

struct SubjectTriple {
    std::string subject_id;
    BrainGraph source;     // morphological, low resolution
    BrainGraph target_lr;  // functional
    BrainGraph target_hr;  // functional, highest resolution

    bool operator==(const SubjectTriple&) const = default;
};

/// Edge-weight offset of the targets relative to the source domain.
struct DomainShift {
    double mean = 0.2;
    double std = 0.05;
    bool operator==(const DomainShift&) const = default;
};

enum class Provenance { Synthetic, Loaded };

class Dataset {
public:
    Dataset(std::vector<SubjectTriple> subjects, std::uint64_t seed, DomainShift shift,
            Provenance provenance);

    std::size_t size() const noexcept { return subjects_.size(); }
    const std::vector<SubjectTriple>& subjects() const noexcept { return subjects_; }
    const SubjectTriple& at(std::size_t i) const { return subjects_.at(i); }
    /// Throws ContractError for unknown ids.
    const SubjectTriple& find(std::string_view id) const;
    std::vector<std::string> ids() const;

    std::uint64_t seed() const noexcept { return seed_; }
    const DomainShift& shift() const noexcept { return shift_; }
    Provenance provenance() const noexcept { return provenance_; }
    Resolutions resolutions() const;

    /// Field-by-field equality (provenance excluded).
    bool same_content(const Dataset& other) const;

private:
    std::vector<SubjectTriple> subjects_;
    std::uint64_t seed_;
    DomainShift shift_;
    Provenance provenance_;
};

// Read access to a Dataset that reports every subject it hands out. Training
// code reads subjects only through a view, which makes test-fold isolation
// observable.
class DatasetView {
public:
    using Observer = std::function<void(const std::string& subject_id)>;

    explicit DatasetView(const Dataset& ds, Observer observer = {})
        : ds_(&ds), observer_(std::move(observer)) {}

    const SubjectTriple& get(std::string_view id) const;
    const Dataset& dataset() const { return *ds_; }

private:
    const Dataset* ds_;
    Observer observer_;
};

struct Fold {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

struct FoldSplit {
    std::size_t k = 0;
    std::vector<Fold> folds;
};

/// Seeded shuffle followed by a contiguous partition into k test folds whose
/// sizes differ by at most one (the first n mod k folds get the extra subject).
FoldSplit kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed);

}  // namespace sgnet
