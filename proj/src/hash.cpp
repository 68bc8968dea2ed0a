/**
 * Copyright 2026 The DualChain Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dualchain/hash.hpp"

#include <openssl/evp.h>

namespace dualchain {

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

bool Hash256::is_zero() const {
    for (auto b : bytes)
        if (b != 0) return false;
    return true;
}

std::string Hash256::hex() const { return to_hex(bytes); }

std::uint64_t Hash256::prefix64() const {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[i];
    return v;
}

Hash256 Hash256::from_hex(std::string_view hex) {
    if (hex.size() != 64) throw Error("Hash256::from_hex: expected 64 hex digits");
    Hash256 h;
    for (std::size_t i = 0; i < 32; ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("Hash256::from_hex: invalid digit");
        h.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return h;
}

std::string to_hex(std::span<const std::uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0xf]);
    }
    return out;
}

namespace {

// Explicitly fetched once; EVP_sha256() goes through a name lookup on every init.
const EVP_MD* sha256_md() {
    static const EVP_MD* md = [] {
        const EVP_MD* m = EVP_MD_fetch(nullptr, "SHA256", nullptr);
        if (m == nullptr) throw Error("sha256: EVP fetch failed");
        return m;
    }();
    return md;
}

struct ThreadCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~ThreadCtx() { EVP_MD_CTX_free(ctx); }
};

}  // namespace

struct Sha256Stream::Impl {
    EVP_MD_CTX* ctx = nullptr;
    Impl() : ctx(EVP_MD_CTX_new()) {
        if (ctx == nullptr || EVP_DigestInit_ex2(ctx, sha256_md(), nullptr) != 1)
            throw Error("sha256: EVP init failed");
    }
    ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256Stream::Sha256Stream() : impl_(std::make_unique<Impl>()) {}
Sha256Stream::~Sha256Stream() = default;
Sha256Stream::Sha256Stream(Sha256Stream&&) noexcept = default;
Sha256Stream& Sha256Stream::operator=(Sha256Stream&&) noexcept = default;

void Sha256Stream::update(std::span<const std::uint8_t> data) {
    EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
}

void Sha256Stream::update(std::string_view data) { EVP_DigestUpdate(impl_->ctx, data.data(), data.size()); }

Hash256 Sha256Stream::finish() {
    Hash256 h;
    unsigned int len = 0;
    EVP_DigestFinal_ex(impl_->ctx, h.bytes.data(), &len);
    EVP_DigestInit_ex2(impl_->ctx, sha256_md(), nullptr);
    return h;
}


Hash256 sha256(std::span<const std::uint8_t> data) {
    thread_local ThreadCtx tc;
    Hash256 h;
    unsigned int len = 0;
    if (tc.ctx == nullptr || EVP_DigestInit_ex2(tc.ctx, sha256_md(), nullptr) != 1 ||
        EVP_DigestUpdate(tc.ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(tc.ctx, h.bytes.data(), &len) != 1)
        throw Error("sha256: EVP digest failed");
    return h;
}

Hash256 sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

Encoder& Encoder::u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
}

Encoder& Encoder::u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    return *this;
}

Encoder& Encoder::u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    return *this;
}

Encoder& Encoder::hash(const Hash256& h) {
    u32(32);
    buf_.insert(buf_.end(), h.bytes.begin(), h.bytes.end());
    return *this;
}

Encoder& Encoder::bytes(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
}

Encoder& Encoder::str(std::string_view s) {
    return bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace dualchain
