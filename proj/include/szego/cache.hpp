#ifndef SZEGO_CACHE_HPP
#define SZEGO_CACHE_HPP

// On-disk replay of eigendecompositions. Entries are raw doubles, so a hit
// reproduces the stored result bit for bit.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "szego/linalg.hpp"

namespace szego {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class EigenCache {
public:
  EigenCache() = default;
  explicit EigenCache(std::filesystem::path dir, std::size_t max_entry_bytes = std::size_t{1} << 30)
      : dir_(std::move(dir)), max_bytes_(max_entry_bytes) {}

  // SZEGO_CACHE_DIR wins over the configured directory.
  static EigenCache from_env(const std::string& configured) {
    if (const char* env = std::getenv("SZEGO_CACHE_DIR"); env && *env) return EigenCache(env);
    if (configured.empty()) return EigenCache();
    return EigenCache(configured);
  }

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& directory() const { return dir_; }

  std::filesystem::path path_for(std::string_view key) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx.eig", static_cast<unsigned long long>(fnv1a(key)));
    return dir_ / buf;
  }

  std::optional<EigenPairs> load(std::string_view key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t klen = 0, rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&klen), sizeof klen);
    if (!in || klen > (1u << 20)) return std::nullopt;
    std::string stored(klen, '\0');
    in.read(stored.data(), static_cast<std::streamsize>(klen));
    // guards against hash collisions
    if (!in || stored != key) return std::nullopt;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in) return std::nullopt;
    EigenPairs r;
    r.values.resize(static_cast<Eigen::Index>(cols));
    r.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(r.values.data()), static_cast<std::streamsize>(cols * sizeof(double)));
    in.read(reinterpret_cast<char*>(r.vectors.data()),
            static_cast<std::streamsize>(rows * cols * sizeof(double)));
    if (!in) return std::nullopt;
    return r;
  }

  // Oversized entries are skipped silently; a failed write never fails the run.
  void store(std::string_view key, const EigenPairs& e) const {
    if (!enabled()) return;
    const std::uint64_t rows = static_cast<std::uint64_t>(e.vectors.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(e.values.size());
    if ((rows + 1) * cols * sizeof(double) > max_bytes_) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    const auto final_path = path_for(key);
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) return;
      const std::uint64_t klen = key.size();
      out.write(reinterpret_cast<const char*>(&klen), sizeof klen);
      out.write(key.data(), static_cast<std::streamsize>(klen));
      out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
      out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
      out.write(reinterpret_cast<const char*>(e.values.data()), static_cast<std::streamsize>(cols * sizeof(double)));
      out.write(reinterpret_cast<const char*>(e.vectors.data()),
                static_cast<std::streamsize>(rows * cols * sizeof(double)));
      if (!out) {
        std::filesystem::remove(tmp, ec);
        return;
      }
    }
    std::filesystem::rename(tmp, final_path, ec);
  }

private:
  std::filesystem::path dir_;
  std::size_t max_bytes_ = std::size_t{1} << 30;
};

} // namespace szego

#endif // SZEGO_CACHE_HPP
