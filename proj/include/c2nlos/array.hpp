#pragma once

#include <cstddef>
#include <vector>

namespace c2nlos {

// Dense row-major storage, last index fastest.
template <typename T>
struct Array2D {
    int rows = 0;
    int cols = 0;
    std::vector<T> v;

    Array2D() = default;
    Array2D(int r, int c, T fill = T{})
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    T& operator()(int i, int j) { return v[idx(i, j)]; }
    const T& operator()(int i, int j) const { return v[idx(i, j)]; }
    T* row(int i) { return v.data() + idx(i, 0); }
    const T* row(int i) const { return v.data() + idx(i, 0); }
    std::size_t size() const { return v.size(); }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j);
    }
};

template <typename T>
struct Array3D {
    int n0 = 0;
    int n1 = 0;
    int n2 = 0;
    std::vector<T> v;

    Array3D() = default;
    Array3D(int a, int b, int c, T fill = T{})
        : n0(a), n1(b), n2(c),
          v(static_cast<std::size_t>(a) * static_cast<std::size_t>(b) * static_cast<std::size_t>(c), fill) {}

    T& operator()(int i, int j, int k) { return v[idx(i, j, k)]; }
    const T& operator()(int i, int j, int k) const { return v[idx(i, j, k)]; }
    T* row(int i, int j) { return v.data() + idx(i, j, 0); }
    const T* row(int i, int j) const { return v.data() + idx(i, j, 0); }
    std::size_t size() const { return v.size(); }

  private:
    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(j)) *
                   static_cast<std::size_t>(n2) +
               static_cast<std::size_t>(k);
    }
};

}  // namespace c2nlos
