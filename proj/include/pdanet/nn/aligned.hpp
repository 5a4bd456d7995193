#pragma once

#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace pdanet::nn {

// 64-byte-aligned allocator. All tensor and parameter storage uses it so
// Eigen's vectorized kernels take the same code path for every allocation;
// reductions then accumulate in one fixed order regardless of where the heap
// happened to place a buffer, which keeps training runs bit-reproducible.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    if (n == 0) return nullptr;
    void* p = std::aligned_alloc(alignment, ((n * sizeof(T) + alignment - 1) / alignment) *
                                                alignment);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
  template <typename U>
  bool operator!=(const AlignedAllocator<U>&) const { return false; }
};

template <typename T>
using avec = std::vector<T, AlignedAllocator<T>>;

} // namespace pdanet::nn
