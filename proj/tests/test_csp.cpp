#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "ipu/csp/crc32.hpp"
#include "ipu/csp/kiss.hpp"
#include "ipu/csp/network.hpp"
#include "ipu/csp/node.hpp"
#include "ipu/csp/packet.hpp"
#include "ipu/csp/param_protocol.hpp"
#include "ipu/csp/param_table.hpp"
#include "ipu/csp/sha1.hpp"

using namespace ipu;
using namespace ipu::csp;

namespace {

Bytes bytes_of(const char* s) { return to_bytes(std::string(s)); }

Bytes random_payload(std::mt19937_64& rng, size_t max_len) {
    Bytes b(rng() % (max_len + 1));
    for (auto& x : b) x = static_cast<uint8_t>(rng());
    return b;
}

const Bytes kKey = bytes_of("orbital-test-key");

}  // namespace

TEST_CASE("crc32_of matches the standard check value and residue") {
    CHECK(crc32_of(bytes_of("123456789")) == 0xCBF43926u);
    // Appending the little-endian CRC and re-running yields the fixed residue.
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        Bytes data = random_payload(rng, 300);
        uint32_t c = crc32_of(data);
        Bytes with_crc = data;
        for (int k = 0; k < 4; ++k) with_crc.push_back(static_cast<uint8_t>(c >> (8 * k)));
        CHECK(crc32_of(with_crc) == kCrc32Residue);
    }
}

TEST_CASE("sha1 matches published digests") {
    auto hex20 = [](const std::array<uint8_t, 20>& d) {
        return hex_encode(ByteView(d.data(), d.size()));
    };
    CHECK(hex20(Sha1::digest(bytes_of(""))) == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(hex20(Sha1::digest(bytes_of("abc"))) == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(hex20(Sha1::digest(bytes_of(
              "abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"))) ==
          "84983e441c3bd26ebaae4aa1f95129e5e54670f1");
    // Streaming in ragged chunks must match one-shot.
    Bytes data(1000);
    for (size_t i = 0; i < data.size(); ++i) data[i] = static_cast<uint8_t>(i * 31 + 7);
    Sha1 s;
    s.update(ByteView(data.data(), 13));
    s.update(ByteView(data.data() + 13, 64));
    s.update(ByteView(data.data() + 77, data.size() - 77));
    CHECK(s.finish() == Sha1::digest(data));
}

TEST_CASE("hmac_sha1 matches RFC 2202 vectors") {
    Bytes key1(20, 0x0b);
    auto mac1 = hmac_sha1(key1, bytes_of("Hi There"));
    CHECK(hex_encode(ByteView(mac1.data(), mac1.size())) ==
          "b617318655057264e28bc0b6fb378c8ef146be00");
    auto mac2 = hmac_sha1(bytes_of("Jefe"), bytes_of("what do ya want for nothing?"));
    CHECK(hex_encode(ByteView(mac2.data(), mac2.size())) ==
          "effcdf6ae5eb2fa2d27416d5f184df9c259a7c79");
    // Key longer than one block is hashed first (RFC 2202 case 6).
    Bytes key6(80, 0xaa);
    auto mac6 = hmac_sha1(key6, bytes_of("Test Using Larger Than Block-Size Key - Hash Key First"));
    CHECK(hex_encode(ByteView(mac6.data(), mac6.size())) ==
          "aa4ae5e15272d00e95705637ce8a3b55ed402112");
    // The wire tag is the leading 4 bytes.
    auto tag = hmac_tag(key1, bytes_of("Hi There"));
    CHECK(tag == std::array<uint8_t, 4>{0xb6, 0x17, 0x31, 0x86});
    CHECK_THROWS_AS(hmac_tag(Bytes{}, bytes_of("x")), std::invalid_argument);
}

TEST_CASE("header packs fields MSB-first into one big-endian word") {
    // Hand-packed oracle: pri=1,src=2,dst=3,dport=4,sport=5,flags=CRC ->
    // 01 000010 000011 000100 000101 010000 = 0x420C4150.
    CspPacket p;
    p.priority = 1;
    p.src_addr = 2;
    p.dst_addr = 3;
    p.dst_port = 4;
    p.src_port = 5;
    p.flags = kFlagCrc;
    Bytes frame = encode_packet(p);
    REQUIRE(frame.size() == 8);  // header + CRC trailer
    CHECK(frame[0] == 0x42);
    CHECK(frame[1] == 0x0C);
    CHECK(frame[2] == 0x41);
    CHECK(frame[3] == 0x50);
    // Trailer is the little-endian CRC of everything before it.
    uint32_t expect = crc32_of(ByteView(frame.data(), 4));
    uint32_t stored = frame[4] | frame[5] << 8 | frame[6] << 16 | frame[7] << 24;
    CHECK(stored == expect);

    // Without any flags the frame is the bare header.
    p.flags = 0;
    Bytes bare = encode_packet(p);
    REQUIRE(bare.size() == 4);
    CHECK(bare[3] == 0x40);  // flags bits now zero

    // Flag bit positions within the low six bits, MSB-first.
    CHECK(kFlagHmac == 0x20);
    CHECK(kFlagCrc == 0x10);
    CHECK(kFlagFrag == 0x08);
    CHECK(kFlagAckReq == 0x04);
}

TEST_CASE("encode_packet rejects out-of-range fields") {
    CspPacket p;
    p.priority = 4;
    CHECK_THROWS_AS(encode_packet(p), std::invalid_argument);
    p.priority = 0;
    p.src_addr = 64;
    CHECK_THROWS_AS(encode_packet(p), std::invalid_argument);
    p.src_addr = 0;
    p.payload.resize(kMaxPayload + 1);
    CHECK_THROWS_AS(encode_packet(p), std::invalid_argument);
    p.payload.resize(kMaxPayload);
    CHECK(encode_packet(p).size() == kHeaderSize + kMaxPayload);
    p.flags = kFlagHmac;
    CHECK_THROWS_AS(encode_packet(p), std::invalid_argument);  // flag without key
    p.flags = kFlagReservedMask;
    CHECK_THROWS_AS(encode_packet(p), std::invalid_argument);  // reserved bits
}

TEST_CASE("packet encode/decode round-trips across randomized field combinations") {
    std::mt19937_64 rng(4242);
    for (int iter = 0; iter < 1000; ++iter) {
        CspPacket p;
        p.priority = static_cast<uint8_t>(rng() % 4);
        p.src_addr = static_cast<uint8_t>(rng() % 64);
        p.dst_addr = static_cast<uint8_t>(rng() % 64);
        p.dst_port = static_cast<uint8_t>(rng() % 64);
        p.src_port = static_cast<uint8_t>(rng() % 64);
        const uint8_t combos[] = {0, kFlagCrc, kFlagHmac, kFlagHmac | kFlagCrc,
                                  kFlagCrc | kFlagFrag, kFlagHmac | kFlagCrc | kFlagAckReq};
        p.flags = combos[rng() % 6];
        p.payload = random_payload(rng, 200);
        auto key = p.has_flag(kFlagHmac) ? std::optional<ByteView>(kKey) : std::nullopt;
        Bytes frame = encode_packet(p, key);
        auto back = decode_packet(frame, key);
        REQUIRE(back.ok());
        CHECK(back.value() == p);
    }
}

TEST_CASE("decode rejects truncation, corruption, and key mismatch") {
    CspPacket p;
    p.priority = 2;
    p.src_addr = 10;
    p.dst_addr = 1;
    p.dst_port = 3;
    p.src_port = 48;
    p.flags = kFlagHmac | kFlagCrc;
    p.payload = bytes_of("telemetry sample payload");
    Bytes frame = encode_packet(p, kKey);

    SUBCASE("short frames") {
        for (size_t n = 0; n < kHeaderSize; ++n) {
            auto r = decode_packet(ByteView(frame.data(), n), kKey);
            REQUIRE(!r.ok());
            CHECK(r.error() == DecodeError::ShortFrame);
        }
        // Header claims HMAC+CRC but the trailers are missing.
        auto r = decode_packet(ByteView(frame.data(), kHeaderSize + 2), kKey);
        REQUIRE(!r.ok());
        CHECK(r.error() == DecodeError::ShortFrame);
    }

    SUBCASE("every single-bit flip is rejected or changes the packet") {
        // CRC32 catches all single-bit errors; a flip can only "succeed" by
        // clearing the CRC flag itself, in which case the decoded packet must
        // differ from the original.
        for (size_t byte = 0; byte < frame.size(); ++byte) {
            for (int bit = 0; bit < 8; ++bit) {
                Bytes bad = frame;
                bad[byte] ^= static_cast<uint8_t>(1u << bit);
                auto r = decode_packet(bad, kKey);
                if (r.ok()) CHECK(r.value() != p);
            }
        }
    }

    SUBCASE("wrong key fails auth") {
        auto r = decode_packet(frame, std::optional<ByteView>(bytes_of("not-the-key")));
        REQUIRE(!r.ok());
        CHECK(r.error() == DecodeError::AuthFailure);
    }

    SUBCASE("missing key is its own error") {
        auto r = decode_packet(frame, std::nullopt);
        REQUIRE(!r.ok());
        CHECK(r.error() == DecodeError::MissingKey);
    }

    SUBCASE("payload corruption under HMAC+CRC reports the CRC first") {
        Bytes bad = frame;
        bad[kHeaderSize] ^= 0xFF;
        auto r = decode_packet(bad, kKey);
        REQUIRE(!r.ok());
        CHECK(r.error() == DecodeError::CrcMismatch);
    }
}

TEST_CASE("kiss framing escapes control bytes and round-trips") {
    // FEND in payload -> FESC TFEND; FESC -> FESC TFESC.
    CHECK(kiss_frame(Bytes{0x01}) == Bytes{0xC0, 0x01, 0xC0});
    CHECK(kiss_frame(Bytes{0xC0}) == Bytes{0xC0, 0xDB, 0xDC, 0xC0});
    CHECK(kiss_frame(Bytes{0xDB}) == Bytes{0xC0, 0xDB, 0xDD, 0xC0});

    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 200; ++iter) {
        Bytes payload = random_payload(rng, 64);
        auto out = kiss_unframe(kiss_frame(payload));
        REQUIRE(out.frames.size() == 1);
        CHECK(out.frames[0] == payload);
        CHECK(out.residual.empty());
    }

    // Worst case: payload of nothing but FENDs doubles in size and survives.
    Bytes fends(50, 0xC0);
    auto out = kiss_unframe(kiss_frame(fends));
    REQUIRE(out.frames.size() == 1);
    CHECK(out.frames[0] == fends);
}

TEST_CASE("kiss stream parsing handles concatenation, noise, and partial frames") {
    Bytes a = bytes_of("alpha");
    Bytes b{0xC0, 0xDB};
    Bytes c;  // empty frame is legal
    Bytes stream;
    auto append = [&](const Bytes& x) {
        Bytes f = kiss_frame(x);
        stream.insert(stream.end(), f.begin(), f.end());
    };
    stream.push_back(0x55);  // line noise before the first frame
    append(a);
    append(b);
    append(c);
    auto out = kiss_unframe(stream);
    REQUIRE(out.frames.size() == 3);
    CHECK(out.frames[0] == a);
    CHECK(out.frames[1] == b);
    CHECK(out.frames[2] == c);
    CHECK(out.residual.empty());

    // A trailing unterminated frame comes back as residual and completes once
    // the rest arrives.
    Bytes tail = kiss_frame(bytes_of("delayed"));
    Bytes first(tail.begin(), tail.begin() + 4);
    Bytes second(tail.begin() + 4, tail.end());
    auto part = kiss_unframe(first);
    CHECK(part.frames.empty());
    CHECK(!part.residual.empty());
    Bytes resume = part.residual;
    resume.insert(resume.end(), second.begin(), second.end());
    auto done = kiss_unframe(resume);
    REQUIRE(done.frames.size() == 1);
    CHECK(done.frames[0] == bytes_of("delayed"));
}

TEST_CASE("parameter table enforces types, writability, and id limits") {
    ParameterTable t;
    t.define("obc_temp_c", 21.5, false, 1000);
    t.define("tx_enabled", true, true, 1000);
    t.define("mode", std::string("idle"), true, 1000);

    auto got = t.get("obc_temp_c");
    REQUIRE(got.ok());
    CHECK(std::get<double>(got.value().value) == 21.5);
    CHECK(got.value().timestamp_ms == 1000);
    CHECK(!got.value().writable);

    CHECK(t.get("nope").error() == ParamError::UnknownParameter);
    CHECK(t.set_remote("obc_temp_c", 25.0, 2000).error() == ParamError::NotWritable);
    CHECK(t.set_remote("tx_enabled", int64_t{1}, 2000).error() == ParamError::TypeMismatch);
    REQUIRE(t.set_remote("tx_enabled", false, 2000).ok());
    CHECK(std::get<bool>(t.get("tx_enabled").value().value) == false);

    // Local set bypasses the writable flag (telemetry publication).
    REQUIRE(t.set_local("obc_temp_c", 25.0, 3000).ok());
    CHECK(std::get<double>(t.get("obc_temp_c").value().value) == 25.0);

    // Timestamps never run backwards even if a caller hands in a stale clock.
    REQUIRE(t.set_local("obc_temp_c", 26.0, 500).ok());
    CHECK(t.get("obc_temp_c").value().timestamp_ms >= 3000);

    CHECK_THROWS_AS(t.define(std::string(33, 'x'), true, true, 0), std::invalid_argument);
    CHECK(t.set_remote("mode", std::string(129, 'y'), 0).error() == ParamError::InvalidValue);

    auto ids = t.ids();
    CHECK(ids == std::vector<std::string>{"mode", "obc_temp_c", "tx_enabled"});
}

TEST_CASE("network routes packets, reports drops, and preserves pair order") {
    Network net;
    auto sat = std::make_shared<Node>(5, "sat");
    auto gnd = std::make_shared<Node>(1, "ground");
    net.add_node(sat);
    net.add_node(gnd);
    Inbox inbox(*gnd, 21);

    CspPacket ping;
    ping.src_addr = 1;
    ping.dst_addr = 5;
    ping.dst_port = kPortPing;
    ping.src_port = 21;
    ping.payload = bytes_of("echo-me");
    CHECK(net.route_and_deliver(ping) == Delivery::Delivered);
    auto reply = inbox.pop();
    REQUIRE(reply.has_value());
    CHECK(reply->payload == bytes_of("echo-me"));
    CHECK(reply->src_addr == 5);
    CHECK(reply->dst_addr == 1);
    CHECK(reply->dst_port == 21);
    CHECK(reply->src_port == kPortPing);

    CspPacket lost = ping;
    lost.dst_addr = 9;
    CHECK(net.route_and_deliver(lost) == Delivery::NoRoute);
    CspPacket unbound = ping;
    unbound.dst_port = 40;
    CHECK(net.route_and_deliver(unbound) == Delivery::NoService);

    // A burst emitted by one handler arrives in emission order.
    sat->bind(30, [](const CspPacket& p, ServiceContext& ctx) {
        for (uint8_t i = 0; i < 5; ++i) ctx.reply(p, Bytes{i});
    });
    CspPacket burst = ping;
    burst.dst_port = 30;
    CHECK(net.route_and_deliver(burst) == Delivery::Delivered);
    for (uint8_t i = 0; i < 5; ++i) {
        auto r = inbox.pop();
        REQUIRE(r.has_value());
        CHECK(r->payload == Bytes{i});
    }
}

TEST_CASE("remote parameter access observes the same table as local access") {
    Network net;
    auto sat = std::make_shared<Node>(5, "sat");
    auto gnd = std::make_shared<Node>(1, "ground");
    net.add_node(sat);
    net.add_node(gnd);
    net.set_now_s(12.0);
    sat->params().define("gain_db", int64_t{3}, true, 0);
    sat->params().define("fw_version", std::string("1.4.2"), false, 0);

    auto exchange = make_exchange(net, *gnd, 21);

    auto got = param_remote_get(exchange, 1, 5, "gain_db", 21);
    REQUIRE(got.ok());
    CHECK(std::get<int64_t>(got.value().value) == 3);

    auto set = param_remote_set(exchange, 1, 5, "gain_db", int64_t{7}, 21);
    REQUIRE(set.ok());
    CHECK(set.value().timestamp_ms == 12000);
    CHECK(std::get<int64_t>(sat->params().get("gain_db").value().value) == 7);

    // Local update becomes visible to the next remote read.
    sat->params().set_local("gain_db", int64_t{9}, 13000);
    CHECK(std::get<int64_t>(param_remote_get(exchange, 1, 5, "gain_db", 21).value().value) == 9);

    CHECK(param_remote_set(exchange, 1, 5, "fw_version", std::string("2.0"), 21).error() ==
          RemoteError::NotWritable);
    CHECK(param_remote_get(exchange, 1, 5, "missing", 21).error() ==
          RemoteError::UnknownParameter);
    CHECK(param_remote_set(exchange, 1, 5, "gain_db", 2.5, 21).error() ==
          RemoteError::TypeMismatch);
    CHECK(param_remote_get(exchange, 1, 9, "gain_db", 21).error() == RemoteError::Unreachable);

    // Round-trip every value type through the wire codec.
    sat->params().define("blob", Bytes{1, 2, 3, 255}, true, 0);
    sat->params().define("flag", false, true, 0);
    sat->params().define("ratio", 0.25, true, 0);
    CHECK(std::get<Bytes>(param_remote_get(exchange, 1, 5, "blob", 21).value().value) ==
          Bytes{1, 2, 3, 255});
    REQUIRE(param_remote_set(exchange, 1, 5, "ratio", 0.75, 21).ok());
    CHECK(std::get<double>(sat->params().get("ratio").value().value) == 0.75);
    REQUIRE(param_remote_set(exchange, 1, 5, "flag", true, 21).ok());
    CHECK(std::get<bool>(sat->params().get("flag").value().value) == true);
}

TEST_CASE("core services: reboot acks then bumps the boot counter") {
    Network net;
    auto sat = std::make_shared<Node>(5);
    auto gnd = std::make_shared<Node>(1);
    net.add_node(sat);
    net.add_node(gnd);
    Inbox inbox(*gnd, 21);

    int hook_runs = 0;
    sat->set_reboot_hook([&](double) { ++hook_runs; });

    CspPacket reboot;
    reboot.src_addr = 1;
    reboot.dst_addr = 5;
    reboot.dst_port = kPortReboot;
    reboot.src_port = 21;
    CHECK(net.route_and_deliver(reboot) == Delivery::Delivered);
    CHECK(inbox.pop().has_value());
    CHECK(sat->boot_count() == 1);
    CHECK(hook_runs == 1);

    CspPacket shutdown = reboot;
    shutdown.dst_port = kPortShutdown;
    CHECK(net.route_and_deliver(shutdown) == Delivery::Delivered);
    CHECK(sat->is_down());
    CHECK(net.route_and_deliver(reboot) == Delivery::Delivered);
    CHECK(!sat->is_down());
    CHECK(sat->boot_count() == 2);
}
