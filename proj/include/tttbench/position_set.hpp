#pragma once

#include <bit>
#include <cstdint>
#include <iterator>

namespace tttbench {

/// A set of board cells, stored as a bitmask. Cell i is the label 'A' + i, so
/// iteration order is label order. Boards have at most 25 cells.
class PositionSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = void;
    using reference = int;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint32_t rest) : rest_(rest) {}

    constexpr int operator*() const { return std::countr_zero(rest_); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    constexpr bool operator==(const iterator&) const = default;

   private:
    std::uint32_t rest_ = 0;
  };

  constexpr PositionSet() = default;
  constexpr explicit PositionSet(std::uint32_t bits) : bits_(bits) {}

  static constexpr PositionSet single(int cell) { return PositionSet{std::uint32_t{1} << cell}; }
  static constexpr PositionSet first_n(int n) {
    return PositionSet{n >= 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1};
  }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int cell) const { return (bits_ >> cell) & 1U; }
  constexpr bool contains_all(PositionSet other) const { return (other.bits_ & ~bits_) == 0; }
  constexpr bool intersects(PositionSet other) const { return (bits_ & other.bits_) != 0; }
  /// Lowest cell; undefined on an empty set.
  constexpr int front() const { return std::countr_zero(bits_); }

  constexpr PositionSet with(int cell) const { return PositionSet{bits_ | (std::uint32_t{1} << cell)}; }
  constexpr PositionSet without(int cell) const { return PositionSet{bits_ & ~(std::uint32_t{1} << cell)}; }

  constexpr PositionSet operator|(PositionSet o) const { return PositionSet{bits_ | o.bits_}; }
  constexpr PositionSet operator&(PositionSet o) const { return PositionSet{bits_ & o.bits_}; }
  /// Set difference.
  constexpr PositionSet operator-(PositionSet o) const { return PositionSet{bits_ & ~o.bits_}; }
  constexpr PositionSet& operator|=(PositionSet o) {
    bits_ |= o.bits_;
    return *this;
  }

  constexpr bool operator==(const PositionSet&) const = default;
  constexpr auto operator<=>(const PositionSet&) const = default;

  constexpr iterator begin() const { return iterator{bits_}; }
  constexpr iterator end() const { return iterator{}; }

 private:
  std::uint32_t bits_ = 0;
};

}  // namespace tttbench
