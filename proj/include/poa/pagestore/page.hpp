#pragma once

#include "poa/bytes.hpp"

#include <complex>
#include <cstddef>
#include <memory>

namespace poa::pagestore {

/// Fixed-size block of unstructured bytes; the unit of storage and
/// transfer. Storage is 4096-aligned so the same buffer works for
/// unbuffered (direct) file I/O.
class Page {
public:
    explicit Page(size_t n);

    size_t size() const { return n_; }
    uint8_t* data() { return data_.get(); }
    const uint8_t* data() const { return data_.get(); }

    void fill(uint8_t byte);
    Payload to_payload() const { return Payload(data(), data() + n_); }
    void from_bytes(const uint8_t* src, size_t n);

private:
    struct FreeDeleter {
        void operator()(uint8_t* p) const { std::free(p); }
    };
    size_t n_;
    std::unique_ptr<uint8_t[], FreeDeleter> data_;
};

/// n1 x n2 x n3 block of complex doubles, row-major with the third index
/// fastest-varying: element (i1,i2,i3) sits at (i1*n2 + i2)*n3 + i3.
class ArrayPage {
public:
    ArrayPage(int n1, int n2, int n3);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int n3() const { return n3_; }
    size_t elements() const { return static_cast<size_t>(n1_) * n2_ * n3_; }
    size_t byte_size() const { return elements() * sizeof(std::complex<double>); }

    std::complex<double>* data();
    const std::complex<double>* data() const;

    std::complex<double>& at(int i1, int i2, int i3) {
        return data()[(static_cast<size_t>(i1) * n2_ + i2) * n3_ + i3];
    }
    const std::complex<double>& at(int i1, int i2, int i3) const {
        return data()[(static_cast<size_t>(i1) * n2_ + i2) * n3_ + i3];
    }

    /// Move element (i1,i2,i3) to (i3,i2,i1); extents become (n3,n2,n1).
    /// Applying the same transpose twice restores the original.
    void transpose13();
    /// Move element (i1,i2,i3) to (i1,i3,i2); extents become (n1,n3,n2).
    void transpose23();

    Page& page() { return page_; }
    const Page& page() const { return page_; }

private:
    int n1_, n2_, n3_;
    Page page_;
};

/// Standalone transposes over raw complex-double buffers (used by the
/// client-side transpose path and by oracles).
void transpose13_buffer(const std::complex<double>* in, std::complex<double>* out,
                        int n1, int n2, int n3);
void transpose23_buffer(const std::complex<double>* in, std::complex<double>* out,
                        int n1, int n2, int n3);

} // namespace poa::pagestore
