#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "muse/errors.hpp"
#include "muse/rng.hpp"
#include "muse/table.hpp"

namespace muse {

/// Source of i.i.d. rows standing in for a generative model. Implementations
/// must be deterministic in (count, seed) and immutable after construction.
class RowSampler {
public:
    virtual ~RowSampler() = default;
    virtual const Schema& schema() const = 0;
    virtual Table sample_rows(std::size_t count, std::uint64_t seed) const = 0;
};

/// Uniform resampling of whole source rows, with replacement.
class BootstrapSampler : public RowSampler {
public:
    explicit BootstrapSampler(Table source) : source_(std::move(source)) {
        if (source_.n_rows() == 0)
            throw EmptyTable("bootstrap sampler needs a nonempty source");
    }

    const Schema& schema() const override { return source_.schema(); }

    Table sample_rows(std::size_t count, std::uint64_t seed) const override {
        std::vector<Row> rows;
        rows.reserve(count);
        const std::uint64_t n = source_.n_rows();
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t pick = static_cast<std::uint64_t>(
                (static_cast<unsigned __int128>(rng_at(seed, i)) * n) >> 64);
            rows.push_back(source_.row(static_cast<std::size_t>(pick)));
        }
        return Table(source_.schema(), std::move(rows));
    }

private:
    Table source_;
};

/// Column-wise independent resampling of the source's empirical marginals:
/// each cell is drawn from its own column, independently of the others.
class IndependentMarginalSampler : public RowSampler {
public:
    explicit IndependentMarginalSampler(const Table& source)
        : schema_(source.schema()) {
        if (source.n_rows() == 0)
            throw EmptyTable("marginal sampler needs a nonempty source");
        columns_.reserve(source.n_cols());
        for (std::size_t j = 0; j < source.n_cols(); ++j) {
            std::vector<CellValue> col;
            col.reserve(source.n_rows());
            for (std::size_t i = 0; i < source.n_rows(); ++i)
                col.push_back(source.cell(i, j));
            columns_.push_back(std::move(col));
        }
    }

    const Schema& schema() const override { return schema_; }

    Table sample_rows(std::size_t count, std::uint64_t seed) const override {
        const std::size_t m = schema_.size();
        const std::uint64_t n = columns_.empty() ? 1 : columns_[0].size();
        std::vector<Row> rows;
        rows.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            Row row;
            row.reserve(m);
            for (std::size_t j = 0; j < m; ++j) {
                std::uint64_t bits = rng_at(seed, i * m + j);
                std::uint64_t pick = static_cast<std::uint64_t>(
                    (static_cast<unsigned __int128>(bits) * n) >> 64);
                row.push_back(columns_[j][static_cast<std::size_t>(pick)]);
            }
            rows.push_back(std::move(row));
        }
        return Table(schema_, std::move(rows));
    }

private:
    Schema schema_;
    std::vector<std::vector<CellValue>> columns_;
};

inline std::unique_ptr<RowSampler> make_sampler(const std::string& kind,
                                                const Table& source) {
    if (kind == "bootstrap")
        return std::make_unique<BootstrapSampler>(source);
    if (kind == "independent")
        return std::make_unique<IndependentMarginalSampler>(source);
    throw InvalidConfig("unknown sampler '" + kind +
                        "' (expected bootstrap or independent)");
}

}  // namespace muse
