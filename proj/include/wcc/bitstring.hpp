#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wcc {

// Growable sequence of bits, packed MSB-first into bytes.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::string_view zeros_and_ones);

  void push_back(bool bit);
  // Appends the low `width` bits of `value`, most significant first.
  void append(std::uint64_t value, unsigned width);
  void append(const BitString& other);

  bool operator[](std::size_t i) const {
    return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
  }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  // Zero-padded to a byte boundary.
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  static BitString from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t bit_count);

  std::string to_string() const;

  friend bool operator==(const BitString& a, const BitString& b) {
    return a.size_ == b.size_ && a.bytes_ == b.bytes_;
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t size_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const BitString& bits, std::size_t pos = 0) : bits_(&bits), pos_(pos) {}

  bool at_end() const noexcept { return pos_ >= bits_->size(); }
  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bits_->size() - pos_; }

  // Throws MalformedStream past the end.
  bool read_bit();
  std::uint64_t read(unsigned width);

 private:
  const BitString* bits_;
  std::size_t pos_;
};

}  // namespace wcc
