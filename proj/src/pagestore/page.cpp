#include "poa/pagestore/page.hpp"

#include "poa/error.hpp"

#include <cstdlib>
#include <cstring>

namespace poa::pagestore {

namespace {
constexpr size_t kAlign = 4096;

uint8_t* aligned_alloc_bytes(size_t n) {
    void* p = nullptr;
    size_t rounded = (n + kAlign - 1) / kAlign * kAlign;
    if (posix_memalign(&p, kAlign, rounded == 0 ? kAlign : rounded) != 0)
        throw std::bad_alloc();
    return static_cast<uint8_t*>(p);
}
} // namespace

Page::Page(size_t n) : n_(n), data_(aligned_alloc_bytes(n)) {
    if (n == 0)
        raise(ErrorCode::SizeMismatch, "page size must be positive");
    std::memset(data_.get(), 0, n_);
}

void Page::fill(uint8_t byte) { std::memset(data_.get(), byte, n_); }

void Page::from_bytes(const uint8_t* src, size_t n) {
    if (n != n_)
        raise(ErrorCode::SizeMismatch,
              "page expects " + std::to_string(n_) + " bytes, got " + std::to_string(n));
    std::memcpy(data_.get(), src, n);
}

ArrayPage::ArrayPage(int n1, int n2, int n3)
    : n1_(n1), n2_(n2), n3_(n3),
      page_(static_cast<size_t>(n1) * n2 * n3 * sizeof(std::complex<double>)) {
    if (n1 <= 0 || n2 <= 0 || n3 <= 0)
        raise(ErrorCode::SizeMismatch, "array page extents must be positive");
}

std::complex<double>* ArrayPage::data() {
    return reinterpret_cast<std::complex<double>*>(page_.data());
}

const std::complex<double>* ArrayPage::data() const {
    return reinterpret_cast<const std::complex<double>*>(page_.data());
}

void transpose13_buffer(const std::complex<double>* in, std::complex<double>* out,
                        int n1, int n2, int n3) {
    // out has extents (n3, n2, n1); out(i3,i2,i1) = in(i1,i2,i3)
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int i3 = 0; i3 < n3; ++i3)
                out[(static_cast<size_t>(i3) * n2 + i2) * n1 + i1] =
                    in[(static_cast<size_t>(i1) * n2 + i2) * n3 + i3];
}

void transpose23_buffer(const std::complex<double>* in, std::complex<double>* out,
                        int n1, int n2, int n3) {
    // out has extents (n1, n3, n2); out(i1,i3,i2) = in(i1,i2,i3)
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2)
            for (int i3 = 0; i3 < n3; ++i3)
                out[(static_cast<size_t>(i1) * n3 + i3) * n2 + i2] =
                    in[(static_cast<size_t>(i1) * n2 + i2) * n3 + i3];
}

void ArrayPage::transpose13() {
    ArrayPage tmp(n3_, n2_, n1_);
    transpose13_buffer(data(), tmp.data(), n1_, n2_, n3_);
    std::memcpy(page_.data(), tmp.page().data(), byte_size());
    std::swap(n1_, n3_);
}

void ArrayPage::transpose23() {
    ArrayPage tmp(n1_, n3_, n2_);
    transpose23_buffer(data(), tmp.data(), n1_, n2_, n3_);
    std::memcpy(page_.data(), tmp.page().data(), byte_size());
    std::swap(n2_, n3_);
}

} // namespace poa::pagestore
