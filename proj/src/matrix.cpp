#include "dpcperm/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "dpcperm/kernels.hpp"

namespace dpcperm {

CMatrix::CMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        data_.insert(data_.end(), r.begin(), r.end());
        data_.resize(data_.size() + (cols_ - std::min(cols_, r.size())));
    }
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::diagonal(std::span<const double> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

CMatrix CMatrix::diagonal(std::span<const cplx> d) {
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

CVector CMatrix::column(std::size_t c) const {
    CVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

CVector CMatrix::diag() const {
    const std::size_t n = std::min(rows_, cols_);
    CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = (*this)(i, i);
    return v;
}

CMatrix CMatrix::adjoint() const {
    CMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = std::conj((*this)(r, c));
    return t;
}

CMatrix CMatrix::transpose() const {
    CMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
    for (cplx& z : data_) z *= s;
    return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    // b^T rows are b's columns, so each output entry is one contiguous matvec row.
    const CMatrix bt = b.transpose();
    CMatrix out(a.rows(), b.cols());
    CVector col(a.rows());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        kernels::matvec(a.data(), a.rows(), a.cols(), bt.row(c), col);
        for (std::size_t r = 0; r < a.rows(); ++r) out(r, c) = col[r];
    }
    return out;
}

CVector operator*(const CMatrix& a, std::span<const cplx> v) {
    CVector out(a.rows());
    kernels::matvec(a.data(), a.rows(), a.cols(), v, out);
    return out;
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

double frobenius_norm(const CMatrix& a) { return std::sqrt(kernels::norm2_squared(a.data())); }

double norm2(std::span<const cplx> v) { return std::sqrt(kernels::norm2_squared(v)); }

bool all_finite(std::span<const cplx> v) {
    return std::all_of(v.begin(), v.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

bool all_finite(const CMatrix& a) { return all_finite(a.data()); }

double max_abs_strictly_upper(const CMatrix& a) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = r + 1; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c)));
    return m;
}

double max_abs_off_diagonal(const CMatrix& a) {
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (r != c) m = std::max(m, std::abs(a(r, c)));
    return m;
}

double unitarity_defect(const CMatrix& a) {
    return frobenius_norm(a * a.adjoint() - CMatrix::identity(a.rows()));
}

}  // namespace dpcperm
