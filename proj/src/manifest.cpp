#include "tttbench/manifest.hpp"

#include <array>
#include <fstream>
#include <map>
#include <memory>

#include <openssl/evp.h>

#include "tttbench/dataset.hpp"
#include "tttbench/errors.hpp"

namespace tttbench {
namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  }
  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 15]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Digest d;
  d.update(data.data(), data.size());
  return d.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Digest d;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

void write_manifest(const std::filesystem::path& out_dir, const std::vector<std::string>& artifacts,
                    const nlohmann::ordered_json& command) {
  const auto path = out_dir / "manifest.json";
  std::map<std::string, nlohmann::ordered_json> entries;
  nlohmann::ordered_json commands = nlohmann::ordered_json::array();
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    const auto old = nlohmann::ordered_json::parse(in, nullptr, false);
    if (!old.is_discarded() && old.is_object()) {
      for (const auto& a : old.value("artifacts", nlohmann::ordered_json::array())) {
        if (a.contains("path") && a["path"].is_string()) entries[a["path"].get<std::string>()] = a;
      }
      for (const auto& c : old.value("commands", nlohmann::ordered_json::array())) {
        if (c.value("subcommand", "") != command.value("subcommand", "")) commands.push_back(c);
      }
    }
  }
  commands.push_back(command);

  for (const auto& name : artifacts) {
    const auto file = out_dir / name;
    std::error_code ec;
    const auto size = std::filesystem::file_size(file, ec);
    if (ec) throw IoError("cannot stat " + file.string());
    nlohmann::ordered_json e;
    e["path"] = name;
    e["bytes"] = size;
    e["sha256"] = sha256_file(file);
    entries[name] = e;
  }

  nlohmann::ordered_json manifest;
  manifest["tool_version"] = kToolVersion;
  manifest["schema_version"] = kSchemaVersion;
  manifest["commands"] = commands;
  manifest["artifacts"] = nlohmann::ordered_json::array();
  for (auto& [name, e] : entries) manifest["artifacts"].push_back(e);

  const auto tmp = out_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace tttbench
