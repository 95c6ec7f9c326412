#ifndef RFFQRNG_BITSTREAM_HPP
#define RFFQRNG_BITSTREAM_HPP

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rffqrng/error.hpp"

namespace rffqrng {

/**
 * Packed bit sequence with an exact length.
 *
 * Bit i lives in word i / 64 at position 63 - i % 64, so the first bit is the
 * most significant bit of the first word. Serialising words big-endian gives
 * the on-disk layout directly. Bits past size() are always zero.
 */
class BitStream {
 public:
  BitStream() = default;
  explicit BitStream(std::size_t n_bits) : words_((n_bits + 63) / 64, 0), n_bits_(n_bits) {}

  /// From a string of '0'/'1' characters; any other character is rejected.
  static BitStream from_string(std::string_view s) {
    BitStream b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '1') {
        b.set(i, true);
      } else if (s[i] != '0') {
        throw Error(ErrorCode::InvalidInput, "bit string may only contain '0' and '1'");
      }
    }
    return b;
  }

  /// From packed bytes, first bit in the MSB of byte 0.
  static BitStream from_bytes(std::span<const std::uint8_t> bytes, std::size_t n_bits) {
    if (bytes.size() * 8 < n_bits) {
      throw Error(ErrorCode::FormatError, "byte buffer shorter than n_bits");
    }
    BitStream b(n_bits);
    const std::size_t n_bytes = (n_bits + 7) / 8;
    for (std::size_t i = 0; i < n_bytes; ++i) {
      b.words_[i / 8] |= std::uint64_t{bytes[i]} << (56 - 8 * (i % 8));
    }
    b.clear_tail();
    return b;
  }

  /// Packed bytes, ceil(n/8) of them; the final byte is zero-padded in its low bits.
  [[nodiscard]] std::vector<std::uint8_t> to_bytes() const {
    const std::size_t n_bytes = (n_bits_ + 7) / 8;
    std::vector<std::uint8_t> out(n_bytes);
    for (std::size_t i = 0; i < n_bytes; ++i) {
      out[i] = static_cast<std::uint8_t>(words_[i / 8] >> (56 - 8 * (i % 8)));
    }
    return out;
  }

  [[nodiscard]] std::string to_string() const {
    std::string s(n_bits_, '0');
    for (std::size_t i = 0; i < n_bits_; ++i) {
      if (get(i)) s[i] = '1';
    }
    return s;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_bits_; }
  [[nodiscard]] bool empty() const noexcept { return n_bits_ == 0; }

  [[nodiscard]] bool get(std::size_t i) const noexcept {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1U;
  }
  void set(std::size_t i, bool v) noexcept {
    const auto mask = std::uint64_t{1} << (63 - (i & 63));
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  /// 64 bits starting at bit position pos, MSB-aligned; positions past the end read as zero.
  [[nodiscard]] std::uint64_t word_at(std::size_t pos) const noexcept {
    const std::size_t w = pos >> 6;
    const unsigned off = pos & 63;
    if (w >= words_.size()) return 0;
    std::uint64_t hi = words_[w] << off;
    if (off != 0 && w + 1 < words_.size()) hi |= words_[w + 1] >> (64 - off);
    return hi;
  }

  [[nodiscard]] std::uint64_t count_ones() const noexcept {
    std::uint64_t n = 0;
    for (auto w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
  }

  /// Ones among bits [begin, end).
  [[nodiscard]] std::uint64_t count_ones(std::size_t begin, std::size_t end) const noexcept {
    std::uint64_t n = 0;
    std::size_t pos = begin;
    for (; pos + 64 <= end; pos += 64) n += static_cast<std::uint64_t>(std::popcount(word_at(pos)));
    if (pos < end) {
      const auto rem = static_cast<unsigned>(end - pos);
      n += static_cast<std::uint64_t>(std::popcount(word_at(pos) >> (64 - rem)));
    }
    return n;
  }

  /// Copy of bits [begin, begin + len).
  [[nodiscard]] BitStream slice(std::size_t begin, std::size_t len) const {
    if (begin + len > n_bits_) throw Error(ErrorCode::InvalidInput, "slice out of range");
    BitStream out(len);
    for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = word_at(begin + 64 * w);
    out.clear_tail();
    return out;
  }

  [[nodiscard]] BitStream complement() const {
    BitStream out(*this);
    for (auto& w : out.words_) w = ~w;
    out.clear_tail();
    return out;
  }

  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] std::span<std::uint64_t> mutable_words() noexcept { return words_; }

  /// Re-establish the zero-tail invariant after writing through mutable_words().
  void clear_tail() noexcept {
    const auto rem = n_bits_ & 63;
    if (rem != 0 && !words_.empty()) words_.back() &= ~std::uint64_t{0} << (64 - rem);
  }

  bool operator==(const BitStream&) const = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t n_bits_ = 0;
};

/// Appends bits one at a time into whole words.
class BitStreamWriter {
 public:
  explicit BitStreamWriter(std::size_t n_bits) : out_(n_bits), words_(out_.mutable_words()) {}

  void push(bool bit) noexcept {
    acc_ = (acc_ << 1) | static_cast<std::uint64_t>(bit);
    if (++fill_ == 64) {
      words_[word_++] = acc_;
      acc_ = 0;
      fill_ = 0;
    }
  }

  BitStream finish() && {
    if (fill_ != 0) words_[word_] = acc_ << (64 - fill_);
    return std::move(out_);
  }

 private:
  BitStream out_;
  std::span<std::uint64_t> words_;
  std::size_t word_ = 0;
  std::uint64_t acc_ = 0;
  unsigned fill_ = 0;
};

}  // namespace rffqrng

#endif  // RFFQRNG_BITSTREAM_HPP
