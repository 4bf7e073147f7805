#include <doctest.h>

#include <array>
#include <random>
#include <string_view>

#include "wurba/wur_codec.hpp"

using namespace wurba;

namespace {

// Independent table-driven CRC-16/CCITT-FALSE over whole octets.
std::uint16_t crc_table_oracle(std::span<const std::uint8_t> bytes) {
  static const auto table = [] {
    std::array<std::uint16_t, 256> t{};
    for (unsigned i = 0; i < 256; ++i) {
      std::uint16_t c = static_cast<std::uint16_t>(i << 8);
      for (int b = 0; b < 8; ++b) c = static_cast<std::uint16_t>((c & 0x8000) ? (c << 1) ^ 0x1021 : c << 1);
      t[i] = c;
    }
    return t;
  }();
  std::uint16_t crc = 0xFFFF;
  for (auto byte : bytes) crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ byte) & 0xFF]);
  return crc;
}

Bits random_bits(std::mt19937_64& rng, std::size_t n) {
  Bits bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return bits;
}

WurFrame sample_frame() {
  WurFrame f;
  f.type = WurFrameType::WakeUp;
  f.address = 0xABC;
  f.td_control = 0x123;
  return f;
}

}  // namespace

TEST_CASE("FCS check value") {
  constexpr std::string_view text = "123456789";
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  CHECK(compute_fcs(bytes_to_bits(bytes)) == 0x29B1);
  CHECK(crc_table_oracle(bytes) == 0x29B1);
}

TEST_CASE("bitwise FCS agrees with a table-driven oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::uint8_t> bytes(1 + rng() % 40);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    REQUIRE(compute_fcs(bytes_to_bits(bytes)) == crc_table_oracle(bytes));
  }
}

TEST_CASE("FCS of an empty sequence is rejected") {
  CHECK_THROWS_AS(compute_fcs(Bits{}), CodecError);
}

TEST_CASE("MAC layout: frame control, MSB-first fields, 48 bits") {
  const Bits bits = serialize_mac(sample_frame());
  REQUIRE(bits.size() == kMinFrameBits);
  const Bits fc(bits.begin(), bits.begin() + 8);
  CHECK(fc == Bits{0, 0, 0, 0, 0, 0, 0, 0});
  const Bits addr(bits.begin() + 8, bits.begin() + 20);
  CHECK(addr == Bits{1, 0, 1, 0, 1, 0, 1, 1, 1, 1, 0, 0});
  const Bits td(bits.begin() + 20, bits.begin() + 32);
  CHECK(td == Bits{0, 0, 0, 1, 0, 0, 1, 0, 0, 0, 1, 1});

  WurFrame with_body = sample_frame();
  with_body.type = WurFrameType::VendorSpecific;
  with_body.body = {0xDE, 0xAD};
  CHECK(with_body.frame_control() == 0x0B);
  CHECK(serialize_mac(with_body).size() == kMinFrameBits + 16);
}

TEST_CASE("serialize/deserialize round trip over random frames") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    WurFrame f;
    f.type = static_cast<WurFrameType>(rng() % 4);
    f.address = static_cast<std::uint16_t>(rng() & 0xFFF);
    f.td_control = static_cast<std::uint16_t>(rng() & 0xFFF);
    f.body.resize(rng() % 9);
    for (auto& b : f.body) b = static_cast<std::uint8_t>(rng());
    const auto bits = serialize_mac(f);
    REQUIRE(deserialize_mac(bits) == finalize(f));
  }
}

TEST_CASE("every single-bit error in a 48-bit frame is detected") {
  const Bits good = serialize_mac(sample_frame());
  for (std::size_t i = 0; i < good.size(); ++i) {
    Bits bad = good;
    bad[i] ^= 1U;
    CHECK_THROWS_AS(deserialize_mac(bad), CodecError);
  }
}

TEST_CASE("field overflow and malformed frames") {
  WurFrame f = sample_frame();
  f.address = 0x1000;
  try {
    serialize_mac(f);
    FAIL("expected overflow");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::FieldOverflow);
  }

  Bits bits = serialize_mac(sample_frame());
  bits.pop_back();
  CHECK_THROWS_AS(deserialize_mac(bits), CodecError);

  // Reserved bit set and FCS recomputed: rejected for the reserved bit.
  Bits reserved = serialize_mac(sample_frame());
  reserved[0] = 1;
  const Bits header(reserved.begin(), reserved.end() - 16);
  Bits rebuilt = header;
  append_bits(rebuilt, compute_fcs(header), 16);
  try {
    deserialize_mac(rebuilt);
    FAIL("expected reserved error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Reserved);
  }

  Bits flipped = serialize_mac(sample_frame());
  flipped[47] ^= 1U;
  try {
    deserialize_mac(flipped);
    FAIL("expected checksum error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Checksum);
  }
}

TEST_CASE("Manchester codewords") {
  const Bits one_zero{1, 0};
  CHECK(encode_manchester(one_zero, DataRate::LDR).symbols == std::vector<std::uint8_t>{1, 0, 1, 0, 0, 1, 0, 1});
  CHECK(encode_manchester(one_zero, DataRate::HDR).symbols == std::vector<std::uint8_t>{1, 0, 0, 1});
  CHECK(encode_manchester(one_zero, DataRate::LDR).symbol_duration == microseconds(4));
  CHECK(encode_manchester(one_zero, DataRate::HDR).symbol_duration == microseconds(2));
  CHECK(encode_manchester(one_zero, DataRate::LDR).duration() == microseconds(32));
  CHECK(encode_manchester(one_zero, DataRate::HDR).duration() == microseconds(8));
}

TEST_CASE("Manchester round trip over random payloads at both rates") {
  std::mt19937_64 rng(31);
  for (DataRate rate : {DataRate::LDR, DataRate::HDR}) {
    for (int trial = 0; trial < 10000; ++trial) {
      const Bits payload = random_bits(rng, rng() % 256);
      const auto symbols = encode_manchester(payload, rate);
      REQUIRE(decode_manchester(symbols, rate) == payload);
    }
  }
}

TEST_CASE("Manchester decoding errors") {
  OokSymbolSeq seq = encode_manchester(Bits{1, 1, 0}, DataRate::LDR);
  seq.symbols.pop_back();
  try {
    decode_manchester(seq, DataRate::LDR);
    FAIL("expected framing error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Framing);
  }

  OokSymbolSeq bad = encode_manchester(Bits{1, 1, 0}, DataRate::HDR);
  bad.symbols[2] = 1;
  bad.symbols[3] = 1;
  try {
    decode_manchester(bad, DataRate::HDR);
    FAIL("expected symbol error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Symbol);
    CHECK(e.index() == 1);
  }
}

TEST_CASE("default sync pattern is the LFSR sequence") {
  // Recurrence form of x^7 + x^6 + 1 from the all-ones seed:
  // s[n + 7] = s[n] ^ s[n + 1].
  std::vector<int> s(7, 1);
  while (s.size() < 127 + 7) s.push_back(s[s.size() - 7] ^ s[s.size() - 6]);
  std::uint32_t expected = 0;
  for (int i = 0; i < 32; ++i) expected = (expected << 1) | static_cast<std::uint32_t>(s[i]);
  CHECK(default_sync_pattern() == expected);
  // Maximal length: the state repeats after 127 steps.
  for (int i = 0; i < 7; ++i) CHECK(s[127 + i] == 1);
}

TEST_CASE("sync field layouts") {
  const std::uint32_t base = 0xF0F0A5A5;
  const auto hdr = build_sync(DataRate::HDR, base);
  REQUIRE(hdr.symbols.size() == 32);
  CHECK(hdr.duration() == microseconds(64));
  CHECK(hdr.symbols[0] == 1);
  CHECK(hdr.symbols[4] == 0);

  const auto ldr = build_sync(DataRate::LDR, base);
  REQUIRE(ldr.symbols.size() == 64);
  CHECK(ldr.duration() == microseconds(128));
  for (int i = 0; i < 32; ++i) {
    CHECK(ldr.symbols[i] == 1 - hdr.symbols[i]);
    CHECK(ldr.symbols[32 + i] == 1 - hdr.symbols[i]);
  }
  const auto ldr_alt = build_sync(DataRate::LDR, base, LdrSyncOrder::PlainThenComplement);
  for (int i = 0; i < 32; ++i) {
    CHECK(ldr_alt.symbols[i] == hdr.symbols[i]);
    CHECK(ldr_alt.symbols[32 + i] == 1 - hdr.symbols[i]);
  }
}

TEST_CASE("PPDU airtime decomposition") {
  const auto ldr = ppdu_airtime(kMinFrameBits, DataRate::LDR);
  CHECK(ldr.preamble == microseconds(20));
  CHECK(ldr.bpsk_mark == microseconds(4));
  CHECK(ldr.sync == microseconds(128));
  CHECK(ldr.data == microseconds(768));
  CHECK(ldr.total == microseconds(920));
  const auto hdr = ppdu_airtime(kMinFrameBits, DataRate::HDR);
  CHECK(hdr.sync == microseconds(64));
  CHECK(hdr.data == microseconds(192));
  CHECK(hdr.total == microseconds(280));

  WurFrame f = sample_frame();
  f.body = {1, 2, 3};
  CHECK(ppdu_airtime(f, DataRate::LDR).total == microseconds(920 + 24 * 16));
}

TEST_CASE("payload rates are 62.5 and 250 kbps") {
  for (std::size_t bits : {48u, 64u, 1000u}) {
    const auto ldr = ppdu_airtime(bits, DataRate::LDR);
    const auto hdr = ppdu_airtime(bits, DataRate::HDR);
    CHECK(static_cast<double>(bits) / to_seconds(ldr.data) == doctest::Approx(62500.0).epsilon(1e-12));
    CHECK(static_cast<double>(bits) / to_seconds(hdr.data) == doctest::Approx(250000.0).epsilon(1e-12));
  }
}

TEST_CASE("FDMA alignment pads to the longest frame") {
  WurFrame longer = sample_frame();
  longer.body = {1, 2, 3, 4};
  const std::vector<FdmaEntry> entries{
      {0, sample_frame(), DataRate::LDR}, {1, sample_frame(), DataRate::HDR}, {2, longer, DataRate::LDR}};
  const auto layouts = fdma_align(entries);
  REQUIRE(layouts.size() == 3);
  const Duration longest = microseconds(920 + 32 * 16);
  for (const auto& l : layouts) {
    CHECK(l.total == longest);
    CHECK(l.preamble + l.bpsk_mark + l.sync + l.data + l.padding == longest);
  }
  CHECK(layouts[2].padding == Duration{0});
  CHECK(layouts[1].padding == longest - microseconds(280));
  CHECK(layouts[0].padding == longest - microseconds(920));

  const std::vector<FdmaEntry> pair{{0, sample_frame(), DataRate::LDR}, {1, sample_frame(), DataRate::HDR}};
  const auto two = fdma_align(pair);
  CHECK(two[0].total == microseconds(920));
  CHECK(two[1].padding == microseconds(640));
}

TEST_CASE("FDMA alignment errors") {
  const std::vector<FdmaEntry> duplicate{{0, sample_frame(), DataRate::LDR}, {0, sample_frame(), DataRate::LDR}};
  try {
    fdma_align(duplicate);
    FAIL("expected multiplexing error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Multiplexing);
  }
  const std::vector<FdmaEntry> secondary_only{{1, sample_frame(), DataRate::LDR}};
  CHECK_THROWS_AS(fdma_align(secondary_only), CodecError);
  FdmaOptions punctured;
  punctured.punctured = {1};
  const std::vector<FdmaEntry> on_punctured{{0, sample_frame(), DataRate::LDR}, {1, sample_frame(), DataRate::LDR}};
  try {
    fdma_align(on_punctured, punctured);
    FAIL("expected subchannel error");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::Subchannel);
  }
}

TEST_CASE("describe_frame reports fields and airtime") {
  const std::string text = describe_frame(finalize(sample_frame()), DataRate::LDR, default_sync_pattern());
  CHECK(text.find("address       0xABC") != std::string::npos);
  CHECK(text.find("airtime_us") != std::string::npos);
  CHECK(text.find("920") != std::string::npos);
}

TEST_CASE("name parsing") {
  CHECK(parse_data_rate("HDR") == DataRate::HDR);
  CHECK(!parse_data_rate("MDR"));
  CHECK(parse_frame_type("wakeup") == WurFrameType::WakeUp);
  CHECK(!parse_frame_type("nonsense"));
}
