#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cpt {

// Little-endian fixed-width encoder. Doubles are written as their IEEE-754
// bit pattern so round trips are exact.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(std::string_view s);
  void raw(std::string_view s) { buf_.append(s); }

  const std::string& bytes() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

// Bounds-checked decoder; any overrun throws CorruptionError.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  std::string_view raw(std::size_t n);

  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  // Structural counts read from a file are checked against this before any
  // allocation.
  void expect_at_least(std::size_t n) const;

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace cpt
