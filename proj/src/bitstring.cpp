#include "wcc/bitstring.hpp"

#include "wcc/error.hpp"

namespace wcc {

BitString::BitString(std::string_view zeros_and_ones) {
  for (char ch : zeros_and_ones) {
    if (ch == '0' || ch == '1') {
      push_back(ch == '1');
    } else if (ch != ' ' && ch != '\t' && ch != '\n') {
      throw DomainError(std::string("invalid bit character '") + ch + "'");
    }
  }
}

void BitString::push_back(bool bit) {
  if ((size_ & 7) == 0) bytes_.push_back(0);
  if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (size_ & 7));
  ++size_;
}

void BitString::append(std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) push_back((value >> i) & 1u);
}

void BitString::append(const BitString& other) {
  for (std::size_t i = 0; i < other.size(); ++i) push_back(other[i]);
}

BitString BitString::from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t bit_count) {
  if (bit_count > bytes.size() * 8) throw MalformedStream("bit count exceeds byte buffer");
  BitString out;
  out.bytes_.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>((bit_count + 7) / 8));
  out.size_ = bit_count;
  if (bit_count & 7) out.bytes_.back() &= static_cast<std::uint8_t>(0xFFu << (8 - (bit_count & 7)));
  return out;
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) s.push_back((*this)[i] ? '1' : '0');
  return s;
}

bool BitReader::read_bit() {
  if (at_end()) throw MalformedStream("truncated stream");
  return (*bits_)[pos_++];
}

std::uint64_t BitReader::read(unsigned width) {
  if (remaining() < width) throw MalformedStream("truncated stream");
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | ((*bits_)[pos_++] ? 1u : 0u);
  return v;
}

}  // namespace wcc
