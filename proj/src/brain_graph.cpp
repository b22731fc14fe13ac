#include "sgnet/brain_graph.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "sgnet/error.hpp"
#include "sgnet/rng.hpp"

namespace sgnet {

std::string_view modality_name(Modality m) {
    return m == Modality::Morphological ? "morphological" : "functional";
}

void validate_adjacency(const Matrix& a, std::string_view what) {
    const std::string w(what);
    if (a.empty() || a.rows() != a.cols())
        throw ContractError(w + ": adjacency must be square and non-empty, got " + a.shape_str());
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (a(i, i) != 0.0)
            throw ContractError(w + ": non-zero diagonal at node " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) {
            const double v = a(i, j);
            if (!std::isfinite(v))
                throw ContractError(w + ": non-finite entry at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            if (v < 0.0 || v > 1.0)
                throw ContractError(w + ": entry outside [0,1] at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            if (j > i && std::abs(v - a(j, i)) > kSymmetryTolerance)
                throw ContractError(w + ": asymmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
        }
    }
}

BrainGraph::BrainGraph(Matrix adjacency, Modality modality)
    : adjacency_(std::move(adjacency)), modality_(modality) {
    validate_adjacency(adjacency_, std::string(modality_name(modality)) + " brain graph");
}

Dataset::Dataset(std::vector<SubjectTriple> subjects, std::uint64_t seed, DomainShift shift,
                 Provenance provenance)
    : subjects_(std::move(subjects)), seed_(seed), shift_(shift), provenance_(provenance) {
    if (subjects_.empty()) throw ContractError("Dataset: no subjects");
    std::set<std::string> seen;
    const Resolutions res{subjects_.front().source.resolution(),
                          subjects_.front().target_lr.resolution(),
                          subjects_.front().target_hr.resolution()};
    for (const auto& s : subjects_) {
        if (!seen.insert(s.subject_id).second)
            throw ContractError("Dataset: duplicate subject id '" + s.subject_id + "'");
        if (s.source.modality() != Modality::Morphological ||
            s.target_lr.modality() != Modality::Functional ||
            s.target_hr.modality() != Modality::Functional)
            throw ContractError("Dataset: subject '" + s.subject_id + "' has wrong modalities");
        const Resolutions r{s.source.resolution(), s.target_lr.resolution(),
                            s.target_hr.resolution()};
        if (!(r == res))
            throw ContractError("Dataset: subject '" + s.subject_id +
                                "' has inconsistent resolutions");
    }
}

const SubjectTriple& Dataset::find(std::string_view id) const {
    for (const auto& s : subjects_)
        if (s.subject_id == id) return s;
    throw ContractError("Dataset: unknown subject id '" + std::string(id) + "'");
}

std::vector<std::string> Dataset::ids() const {
    std::vector<std::string> out;
    out.reserve(subjects_.size());
    for (const auto& s : subjects_) out.push_back(s.subject_id);
    return out;
}

Resolutions Dataset::resolutions() const {
    const auto& s = subjects_.front();
    return {s.source.resolution(), s.target_lr.resolution(), s.target_hr.resolution()};
}

bool Dataset::same_content(const Dataset& other) const {
    return subjects_ == other.subjects_ && seed_ == other.seed_ && shift_ == other.shift_;
}

const SubjectTriple& DatasetView::get(std::string_view id) const {
    const SubjectTriple& s = ds_->find(id);
    if (observer_) observer_(s.subject_id);
    return s;
}

FoldSplit kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ContractError("kfold_split: k must be >= 2");
    const std::size_t n = ds.size();
    if (n < k)
        throw ContractError("kfold_split: " + std::to_string(n) + " subjects cannot form " +
                            std::to_string(k) + " folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);

    FoldSplit split;
    split.k = k;
    const std::size_t base = n / k, extra = n % k;
    std::size_t start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        Fold fold;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& id = ds.at(order[i]).subject_id;
            if (i >= start && i < start + len) fold.test_ids.push_back(id);
            else fold.train_ids.push_back(id);
        }
        split.folds.push_back(std::move(fold));
        start += len;
    }
    return split;
}

}  // namespace sgnet
