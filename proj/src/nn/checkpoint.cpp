// SPDX-License-Identifier: Apache-2.0
#include "linksense/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "linksense/hash.hpp"

namespace linksense::nn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::filesystem::path manifest_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".json";
  return p;
}

std::filesystem::path blob_path(const std::filesystem::path& stem) {
  auto p = stem;
  p += ".bin";
  return p;
}

void write_le_f32(std::ofstream& out, const float* data, std::size_t count) {
  static_assert(sizeof(float) == 4);
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * 4));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint32_t v;
      std::memcpy(&v, &data[i], 4);
      char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                   static_cast<char>((v >> 16) & 0xff),
                   static_cast<char>((v >> 24) & 0xff)};
      out.write(b, 4);
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& stem,
                     const std::vector<Param<float>*>& params) {
  ordered_json manifest;
  manifest["format"] = "CKP1";
  manifest["version"] = 1;
  manifest["tensors"] = ordered_json::array();

  std::ofstream blob(blob_path(stem), std::ios::binary);
  if (!blob) throw FormatError("CKP1: cannot write " + blob_path(stem).string());
  std::size_t offset = 0;
  for (const Param<float>* p : params) {
    ordered_json t;
    t["name"] = p->name;
    t["shape"] = p->value.shape;
    t["dtype"] = "f32";
    t["offset"] = offset;
    t["size"] = p->value.data.size();
    manifest["tensors"].push_back(t);
    write_le_f32(blob, p->value.ptr(), p->value.data.size());
    offset += p->value.data.size() * 4;
  }
  blob.flush();
  if (!blob) throw FormatError("CKP1: write failed for " + blob_path(stem).string());
  blob.close();

  std::ofstream mf(manifest_path(stem));
  if (!mf) throw FormatError("CKP1: cannot write " + manifest_path(stem).string());
  mf << manifest.dump(2) << "\n";
}

void load_checkpoint(const std::filesystem::path& stem,
                     const std::vector<Param<float>*>& params) {
  std::ifstream mf(manifest_path(stem));
  if (!mf) throw FormatError("CKP1: cannot open " + manifest_path(stem).string());
  ordered_json manifest;
  try {
    mf >> manifest;
  } catch (const std::exception& e) {
    throw FormatError("CKP1: bad manifest: " + std::string(e.what()));
  }
  if (manifest.value("format", "") != "CKP1") {
    throw FormatError("CKP1: unrecognized checkpoint format");
  }

  std::ifstream blob(blob_path(stem), std::ios::binary);
  if (!blob) throw FormatError("CKP1: cannot open " + blob_path(stem).string());

  for (Param<float>* p : params) {
    const ordered_json* entry = nullptr;
    for (const auto& t : manifest.at("tensors")) {
      if (t.at("name") == p->name) {
        entry = &t;
        break;
      }
    }
    if (!entry) throw FormatError("CKP1: tensor " + p->name + " missing");
    const std::vector<int> shape = entry->at("shape").get<std::vector<int>>();
    if (shape != p->value.shape) {
      throw FormatError("CKP1: shape mismatch for " + p->name);
    }
    const std::size_t offset = entry->at("offset");
    const std::size_t count = entry->at("size");
    if (count != p->value.data.size()) {
      throw FormatError("CKP1: size mismatch for " + p->name);
    }
    blob.seekg(static_cast<std::streamoff>(offset));
    if constexpr (std::endian::native == std::endian::little) {
      blob.read(reinterpret_cast<char*>(p->value.ptr()),
                static_cast<std::streamsize>(count * 4));
    } else {
      for (std::size_t i = 0; i < count; ++i) {
        unsigned char b[4];
        blob.read(reinterpret_cast<char*>(b), 4);
        const std::uint32_t v = static_cast<std::uint32_t>(b[0]) |
                                (static_cast<std::uint32_t>(b[1]) << 8) |
                                (static_cast<std::uint32_t>(b[2]) << 16) |
                                (static_cast<std::uint32_t>(b[3]) << 24);
        std::memcpy(&p->value.data[i], &v, 4);
      }
    }
    if (!blob) throw FormatError("CKP1: truncated blob reading " + p->name);
  }
}

std::uint64_t checkpoint_hash(const std::filesystem::path& stem) {
  std::ifstream blob(blob_path(stem), std::ios::binary);
  if (!blob) throw FormatError("CKP1: cannot open " + blob_path(stem).string());
  Fnv1a64 h;
  char buf[65536];
  while (blob.read(buf, sizeof buf) || blob.gcount() > 0) {
    h.update(buf, static_cast<std::size_t>(blob.gcount()));
    if (!blob) break;
  }
  return h.digest();
}

}  // namespace linksense::nn
