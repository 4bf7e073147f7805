#include "wurba/wur_codec.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

namespace wurba {

namespace {

constexpr std::uint8_t kLengthPresentFlag = 0x08;
constexpr std::uint8_t kTypeMask = 0x07;
constexpr std::uint8_t kReservedMask = 0xF0;

std::uint64_t read_bits(std::span<const std::uint8_t> bits, std::size_t offset, unsigned width) {
  std::uint64_t value = 0;
  for (unsigned i = 0; i < width; ++i) {
    value = (value << 1) | (bits[offset + i] & 1U);
  }
  return value;
}

std::string bit_string(std::span<const std::uint8_t> bits) {
  std::string out;
  out.reserve(bits.size());
  for (auto b : bits) {
    out.push_back(b ? '1' : '0');
  }
  return out;
}

}  // namespace

std::string_view to_string(WurFrameType type) {
  switch (type) {
    case WurFrameType::WakeUp: return "WakeUp";
    case WurFrameType::WurBeacon: return "WurBeacon";
    case WurFrameType::WurDiscovery: return "WurDiscovery";
    case WurFrameType::VendorSpecific: return "VendorSpecific";
  }
  return "?";
}

std::string_view to_string(DataRate rate) { return rate == DataRate::LDR ? "LDR" : "HDR"; }

std::optional<WurFrameType> parse_frame_type(std::string_view text) {
  for (auto t : {WurFrameType::WakeUp, WurFrameType::WurBeacon, WurFrameType::WurDiscovery,
                 WurFrameType::VendorSpecific}) {
    std::string lower(to_string(t));
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    std::string given(text);
    std::transform(given.begin(), given.end(), given.begin(), [](unsigned char c) { return std::tolower(c); });
    if (given == lower) {
      return t;
    }
  }
  if (text == "wakeup" || text == "wake-up" || text == "0") return WurFrameType::WakeUp;
  if (text == "beacon" || text == "1") return WurFrameType::WurBeacon;
  if (text == "discovery" || text == "2") return WurFrameType::WurDiscovery;
  if (text == "vendor" || text == "3") return WurFrameType::VendorSpecific;
  return std::nullopt;
}

std::optional<DataRate> parse_data_rate(std::string_view text) {
  if (text == "LDR" || text == "ldr") return DataRate::LDR;
  if (text == "HDR" || text == "hdr") return DataRate::HDR;
  return std::nullopt;
}

Duration payload_bit_duration(DataRate rate) {
  return rate == DataRate::LDR ? microseconds(16) : microseconds(4);
}

Duration data_symbol_duration(DataRate rate) {
  return rate == DataRate::LDR ? microseconds(4) : microseconds(2);
}

std::uint8_t WurFrame::frame_control() const {
  auto fc = static_cast<std::uint8_t>(static_cast<std::uint8_t>(type) & kTypeMask);
  if (!body.empty()) {
    fc |= kLengthPresentFlag;
  }
  return fc;
}

WurFrame finalize(WurFrame frame) {
  const Bits bits = serialize_mac(frame);
  frame.fcs = static_cast<std::uint16_t>(read_bits(bits, bits.size() - kFcsBits, kFcsBits));
  return frame;
}

std::uint16_t compute_fcs(std::span<const std::uint8_t> bits) {
  if (bits.empty()) {
    throw CodecError(CodecError::Kind::Framing, "FCS over an empty bit sequence");
  }
  std::uint16_t crc = 0xFFFF;
  for (auto bit : bits) {
    const bool feedback = ((crc >> 15) & 1U) != (bit & 1U);
    crc = static_cast<std::uint16_t>(crc << 1);
    if (feedback) {
      crc ^= 0x1021;
    }
  }
  return crc;
}

void append_bits(Bits& out, std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) {
    out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
  }
}

Bits bytes_to_bits(std::span<const std::uint8_t> bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (auto byte : bytes) {
    append_bits(out, byte, 8);
  }
  return out;
}

Bits serialize_mac(const WurFrame& frame) {
  if (frame.address > kMaxAddress) {
    throw CodecError(CodecError::Kind::FieldOverflow, fmt::format("address 0x{:X} exceeds 12 bits", frame.address));
  }
  if (frame.td_control > kMaxAddress) {
    throw CodecError(CodecError::Kind::FieldOverflow,
                     fmt::format("TD control 0x{:X} exceeds 12 bits", frame.td_control));
  }
  Bits bits;
  bits.reserve(frame.bit_length());
  append_bits(bits, frame.frame_control(), 8);
  append_bits(bits, frame.address, 12);
  append_bits(bits, frame.td_control, 12);
  for (auto byte : frame.body) {
    append_bits(bits, byte, 8);
  }
  append_bits(bits, compute_fcs(bits), kFcsBits);
  return bits;
}

WurFrame deserialize_mac(std::span<const std::uint8_t> bits) {
  if (bits.size() < kMinFrameBits) {
    throw CodecError(CodecError::Kind::Framing,
                     fmt::format("frame of {} bits is shorter than {}", bits.size(), kMinFrameBits), bits.size());
  }
  if ((bits.size() - kMinFrameBits) % 8 != 0) {
    throw CodecError(CodecError::Kind::Framing, "frame body is not a whole number of octets", kHeaderBits);
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      throw CodecError(CodecError::Kind::Framing, "bit value other than 0 or 1", i);
    }
  }
  const auto fc = static_cast<std::uint8_t>(read_bits(bits, 0, 8));
  if ((fc & kReservedMask) != 0) {
    throw CodecError(CodecError::Kind::Reserved, "reserved Frame Control bits are set");
  }
  const auto type_value = fc & kTypeMask;
  if (type_value > static_cast<unsigned>(WurFrameType::VendorSpecific)) {
    throw CodecError(CodecError::Kind::Reserved, fmt::format("unknown frame type {}", type_value));
  }
  const bool length_present = (fc & kLengthPresentFlag) != 0;
  const std::size_t body_bits = bits.size() - kMinFrameBits;
  if (length_present != (body_bits > 0)) {
    throw CodecError(CodecError::Kind::Framing, "length-present flag disagrees with the frame length", 4);
  }
  const auto payload = bits.first(bits.size() - kFcsBits);
  const auto received_fcs = static_cast<std::uint16_t>(read_bits(bits, bits.size() - kFcsBits, kFcsBits));
  if (compute_fcs(payload) != received_fcs) {
    throw CodecError(CodecError::Kind::Checksum, "FCS mismatch");
  }

  WurFrame frame;
  frame.type = static_cast<WurFrameType>(type_value);
  frame.address = static_cast<std::uint16_t>(read_bits(bits, 8, 12));
  frame.td_control = static_cast<std::uint16_t>(read_bits(bits, 20, 12));
  frame.body.reserve(body_bits / 8);
  for (std::size_t off = kHeaderBits; off < kHeaderBits + body_bits; off += 8) {
    frame.body.push_back(static_cast<std::uint8_t>(read_bits(bits, off, 8)));
  }
  frame.fcs = received_fcs;
  return frame;
}

OokSymbolSeq encode_manchester(std::span<const std::uint8_t> bits, DataRate rate) {
  static constexpr std::array<std::uint8_t, 4> kLdrOne{1, 0, 1, 0};
  static constexpr std::array<std::uint8_t, 4> kLdrZero{0, 1, 0, 1};
  OokSymbolSeq out;
  out.symbol_duration = data_symbol_duration(rate);
  if (rate == DataRate::LDR) {
    out.symbols.reserve(bits.size() * 4);
    for (auto bit : bits) {
      const auto& word = bit ? kLdrOne : kLdrZero;
      out.symbols.insert(out.symbols.end(), word.begin(), word.end());
    }
  } else {
    out.symbols.reserve(bits.size() * 2);
    for (auto bit : bits) {
      out.symbols.push_back(bit ? 1 : 0);
      out.symbols.push_back(bit ? 0 : 1);
    }
  }
  return out;
}

Bits decode_manchester(const OokSymbolSeq& symbols, DataRate rate) {
  const std::size_t width = rate == DataRate::LDR ? 4 : 2;
  const auto& s = symbols.symbols;
  if (s.size() % width != 0) {
    throw CodecError(CodecError::Kind::Framing,
                     fmt::format("{} symbols is not a multiple of {}", s.size(), width), s.size());
  }
  Bits bits;
  bits.reserve(s.size() / width);
  for (std::size_t chunk = 0; chunk * width < s.size(); ++chunk) {
    const std::size_t o = chunk * width;
    int bit = -1;
    if (width == 4) {
      if (s[o] == 1 && s[o + 1] == 0 && s[o + 2] == 1 && s[o + 3] == 0) bit = 1;
      if (s[o] == 0 && s[o + 1] == 1 && s[o + 2] == 0 && s[o + 3] == 1) bit = 0;
    } else {
      if (s[o] == 1 && s[o + 1] == 0) bit = 1;
      if (s[o] == 0 && s[o + 1] == 1) bit = 0;
    }
    if (bit < 0) {
      throw CodecError(CodecError::Kind::Symbol, fmt::format("invalid codeword at chunk {}", chunk), chunk);
    }
    bits.push_back(static_cast<std::uint8_t>(bit));
  }
  return bits;
}

std::uint32_t default_sync_pattern() {
  std::uint32_t state = 0x7F;
  std::uint32_t pattern = 0;
  for (int i = 0; i < 32; ++i) {
    const std::uint32_t out = (state >> 6) & 1U;
    const std::uint32_t feedback = ((state >> 6) ^ (state >> 5)) & 1U;
    state = ((state << 1) | feedback) & 0x7F;
    pattern = (pattern << 1) | out;
  }
  return pattern;
}

OokSymbolSeq build_sync(DataRate rate, std::uint32_t base_sequence, LdrSyncOrder order) {
  OokSymbolSeq out;
  out.symbol_duration = kSyncSymbolDuration;
  auto push_word = [&out](std::uint32_t word) {
    for (int i = 31; i >= 0; --i) {
      out.symbols.push_back(static_cast<std::uint8_t>((word >> i) & 1U));
    }
  };
  if (rate == DataRate::HDR) {
    push_word(base_sequence);
  } else {
    push_word(order == LdrSyncOrder::ComplementTwice ? ~base_sequence : base_sequence);
    push_word(~base_sequence);
  }
  return out;
}

Duration sync_duration(DataRate rate) {
  return kSyncSymbolDuration * (rate == DataRate::HDR ? 32 : 64);
}

PpduLayout ppdu_airtime(std::size_t payload_bits, DataRate rate) {
  PpduLayout layout;
  layout.preamble = kLegacyPreamble;
  layout.bpsk_mark = kBpskMark;
  layout.sync = sync_duration(rate);
  layout.data = payload_bit_duration(rate) * static_cast<std::int64_t>(payload_bits);
  layout.payload_bits = payload_bits;
  layout.total = layout.preamble + layout.bpsk_mark + layout.sync + layout.data;
  return layout;
}

PpduLayout ppdu_airtime(const WurFrame& frame, DataRate rate) { return ppdu_airtime(frame.bit_length(), rate); }

std::vector<PpduLayout> fdma_align(std::span<const FdmaEntry> entries, const FdmaOptions& options) {
  std::set<int> used;
  bool primary_present = false;
  for (const auto& e : entries) {
    if (!used.insert(e.subchannel).second) {
      throw CodecError(CodecError::Kind::Multiplexing,
                       fmt::format("two WUR frames on 20 MHz subchannel {}", e.subchannel));
    }
    if (std::find(options.punctured.begin(), options.punctured.end(), e.subchannel) != options.punctured.end()) {
      throw CodecError(CodecError::Kind::Subchannel, fmt::format("subchannel {} is punctured", e.subchannel));
    }
    primary_present = primary_present || e.subchannel == options.primary_subchannel;
  }
  const bool primary_documented =
      std::find(options.punctured.begin(), options.punctured.end(), options.primary_subchannel) !=
      options.punctured.end();
  if (!entries.empty() && !primary_present && !primary_documented) {
    throw CodecError(CodecError::Kind::Subchannel, "FDMA transmission omits the primary subchannel");
  }

  std::vector<PpduLayout> layouts;
  layouts.reserve(entries.size());
  Duration longest{0};
  for (const auto& e : entries) {
    layouts.push_back(ppdu_airtime(e.frame, e.rate));
    longest = std::max(longest, layouts.back().total);
  }
  for (auto& layout : layouts) {
    layout.padding = longest - layout.total;
    layout.total = longest;
  }
  return layouts;
}

std::string describe_frame(const WurFrame& frame, DataRate rate, std::uint32_t sync_pattern, LdrSyncOrder order) {
  const Bits bits = serialize_mac(frame);
  const std::uint16_t fcs = compute_fcs(std::span(bits).first(bits.size() - kFcsBits));
  const auto sync = build_sync(rate, sync_pattern, order);
  const auto data = encode_manchester(bits, rate);
  const auto layout = ppdu_airtime(frame, rate);
  const std::span<const std::uint8_t> all(bits);

  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) {
    out += fmt::format("{:<14}{}\n", key, value);
  };
  line("frame_type", fmt::format("{} ({})", to_string(frame.type), static_cast<int>(frame.type)));
  line("frame_control", fmt::format("0x{:02X} {}", frame.frame_control(), bit_string(all.subspan(0, 8))));
  line("address", fmt::format("0x{:03X} {}", frame.address, bit_string(all.subspan(8, 12))));
  line("td_control", fmt::format("0x{:03X} {}", frame.td_control, bit_string(all.subspan(20, 12))));
  if (frame.body.empty()) {
    line("body", "- (0 octets)");
  } else {
    std::string hex;
    for (auto b : frame.body) hex += fmt::format("{:02X}", b);
    line("body", fmt::format("{} ({} octets)", hex, frame.body.size()));
  }
  line("fcs", fmt::format("0x{:04X} {}", fcs, bit_string(all.last(kFcsBits))));
  line("mac_bits", std::to_string(bits.size()));
  line("bits", bit_string(bits));
  line("rate", std::string(to_string(rate)));
  line("sync", fmt::format("{} symbols x {} us: {}", sync.symbols.size(),
                           to_microseconds(sync.symbol_duration), bit_string(sync.symbols)));
  line("data_symbols", fmt::format("{} symbols x {} us: {}", data.symbols.size(),
                                   to_microseconds(data.symbol_duration), bit_string(data.symbols)));
  line("airtime_us", fmt::format("preamble={} bpsk_mark={} sync={} data={} total={}",
                                 to_microseconds(layout.preamble), to_microseconds(layout.bpsk_mark),
                                 to_microseconds(layout.sync), to_microseconds(layout.data),
                                 to_microseconds(layout.total)));
  return out;
}

}  // namespace wurba
