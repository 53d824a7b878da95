#include "fmgeig/sparse_matrix.hpp"

#include "fmgeig/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace fmgeig {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != col_idx_.size() || col_idx_.size() != values_.size())
        throw InvalidArgument("SparseMatrix: inconsistent CSR arrays");
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1])
            throw InvalidArgument("SparseMatrix: row offsets decrease");
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= cols_)
                throw InvalidArgument("SparseMatrix: column index out of range");
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
                throw InvalidArgument("SparseMatrix: column indices not strictly increasing");
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const auto& t = triplets[k];
        if (t.row >= rows || t.col >= cols)
            throw InvalidArgument("SparseMatrix::from_triplets: index out of range");
        if (k > 0 && t.row == triplets[k - 1].row && t.col == triplets[k - 1].col) {
            values.back() += t.value;
            continue;
        }
        col_idx.push_back(t.col);
        values.push_back(t.value);
        ++row_ptr[t.row + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return SparseMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::iota(col_idx.begin(), col_idx.end(), std::size_t{0});
    return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), Vector(n, 1.0));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
    if (row >= rows_ || col >= cols_)
        throw InvalidArgument("SparseMatrix::at: index out of range");
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col)
        return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

double SparseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<std::size_t> row_ptr(cols_ + 1, 0);
    for (std::size_t c : col_idx_)
        ++row_ptr[c + 1];
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    std::vector<std::size_t> next(row_ptr.begin(), row_ptr.end() - 1);
    std::vector<std::size_t> col_idx(nnz());
    std::vector<double> values(nnz());
    // Rows are visited in order, so each transposed row comes out sorted.
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t dst = next[col_idx_[k]]++;
            col_idx[dst] = i;
            values[dst] = values_[k];
        }
    }
    return SparseMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

bool SparseMatrix::is_symmetric() const {
    if (!square())
        return false;
    const SparseMatrix t = transpose();
    return t.col_idx_ == col_idx_ && t.row_ptr_ == row_ptr_ && t.values_ == values_;
}

double SparseMatrix::symmetry_defect() const {
    if (!square())
        return std::numeric_limits<double>::infinity();
    double defect = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            defect = std::max(defect, std::abs(values_[k] - at(col_idx_[k], i)));
    return defect;
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("multiply: inner dimensions differ");
    const auto arp = a.row_ptr();
    const auto aci = a.col_idx();
    const auto av = a.values();
    const auto brp = b.row_ptr();
    const auto bci = b.col_idx();
    const auto bv = b.values();

    std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    // Dense accumulator with a marker array (Gustavson).
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<std::size_t> marker(b.cols(), std::numeric_limits<std::size_t>::max());
    std::vector<std::size_t> pattern;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        pattern.clear();
        for (std::size_t ka = arp[i]; ka < arp[i + 1]; ++ka) {
            const std::size_t j = aci[ka];
            for (std::size_t kb = brp[j]; kb < brp[j + 1]; ++kb) {
                const std::size_t c = bci[kb];
                if (marker[c] != i) {
                    marker[c] = i;
                    acc[c] = 0.0;
                    pattern.push_back(c);
                }
                acc[c] += av[ka] * bv[kb];
            }
        }
        std::sort(pattern.begin(), pattern.end());
        for (std::size_t c : pattern) {
            col_idx.push_back(c);
            values.push_back(acc[c]);
        }
        row_ptr[i + 1] = col_idx.size();
    }
    return SparseMatrix(a.rows(), b.cols(), std::move(row_ptr), std::move(col_idx),
                        std::move(values));
}

SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a) {
    if (!a.square() || a.rows() != p.rows())
        throw DimensionMismatch("galerkin_product: shapes do not match");
    SparseMatrix result = multiply(p.transpose(), multiply(a, p));
    // Round-off in the two products can break bitwise symmetry; average it out.
    if (!result.is_symmetric()) {
        const SparseMatrix t = result.transpose();
        std::vector<Triplet> trips;
        trips.reserve(result.nnz() + t.nnz());
        for (const SparseMatrix* m : {static_cast<const SparseMatrix*>(&result), &t})
            for (std::size_t i = 0; i < m->rows(); ++i)
                for (std::size_t k = m->row_ptr()[i]; k < m->row_ptr()[i + 1]; ++k)
                    trips.push_back({i, m->col_idx()[k], 0.5 * m->values()[k]});
        result = SparseMatrix::from_triplets(result.rows(), result.cols(), std::move(trips));
    }
    return result;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double scale) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("add: shapes differ");
    std::vector<Triplet> trips;
    trips.reserve(a.nnz() + b.nnz());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            trips.push_back({i, a.col_idx()[k], a.values()[k]});
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t k = b.row_ptr()[i]; k < b.row_ptr()[i + 1]; ++k)
            trips.push_back({i, b.col_idx()[k], scale * b.values()[k]});
    return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(trips));
}

void write_matrix_market(const SparseMatrix& m, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
            out << i + 1 << ' ' << m.col_idx()[k] + 1 << ' ' << m.values()[k] << '\n';
    out.precision(old_precision);
}

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_content_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line[0] != '%')
                return true;
        }
        return false;
    };
    if (!next_content_line())
        throw ParseError(line_no, "missing MatrixMarket size line");
    std::size_t rows = 0, cols = 0, nnz = 0;
    {
        std::istringstream ss(line);
        if (!(ss >> rows >> cols >> nnz))
            throw ParseError(line_no, "malformed size line");
    }
    std::vector<Triplet> trips;
    trips.reserve(nnz);
    for (std::size_t e = 0; e < nnz; ++e) {
        if (!next_content_line())
            throw ParseError(line_no, "unexpected end of file");
        std::istringstream ss(line);
        std::size_t i = 0, j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v))
            throw ParseError(line_no, "malformed entry");
        if (i == 0 || j == 0 || i > rows || j > cols)
            throw ParseError(line_no, "entry index out of range");
        trips.push_back({i - 1, j - 1, v});
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(trips));
}

} // namespace fmgeig
