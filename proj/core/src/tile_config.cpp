#include "uot/tiled.hpp"

#include <string>

#include "uot/error.hpp"

namespace uot {

namespace {
std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }
}  // namespace

TileConfig default_part2_config(std::size_t m, std::size_t n) {
  TileConfig cfg;
  cfg.tx = 32;
  cfg.ty = 2;
  cfg.ny = 8;
  cfg.bx = ceil_div(n, cfg.tx);
  cfg.by = ceil_div(m, cfg.ty * cfg.ny);
  return cfg;
}

TileConfig default_part4_config(std::size_t m, std::size_t n) {
  TileConfig cfg;
  cfg.tx = 128;
  cfg.ty = 1;
  cfg.ny = 8;
  cfg.bx = ceil_div(n, cfg.tx);
  cfg.by = ceil_div(m, cfg.ny);
  return cfg;
}

void validate_part2_config(const TileConfig& cfg, std::size_t m, std::size_t n) {
  if (cfg.bx < 1 || cfg.by < 1 || cfg.tx < 1 || cfg.ty < 1 || cfg.ny < 1)
    throw ConfigError("part2 config: every extent must be at least 1");
  if (cfg.bx * cfg.tx < n)
    throw ConfigError("part2 config: grid covers only " + std::to_string(cfg.bx * cfg.tx) +
                      " of " + std::to_string(n) + " columns");
  if (cfg.by * cfg.ty * cfg.ny < m)
    throw ConfigError("part2 config: grid covers only " + std::to_string(cfg.by * cfg.ty * cfg.ny) +
                      " of " + std::to_string(m) + " rows");
}

void validate_part4_config(const TileConfig& cfg, std::size_t m, std::size_t n) {
  if (cfg.bx < 1 || cfg.by < 1 || cfg.tx < 1 || cfg.ny < 1)
    throw ConfigError("part4 config: every extent must be at least 1");
  if (cfg.ty != 1) throw ConfigError("part4 config: block must be one row of lanes (ty == 1)");
  if (cfg.tx % kLaneGroup != 0)
    throw ConfigError("part4 config: block width must be a multiple of " +
                      std::to_string(kLaneGroup));
  if (cfg.bx * cfg.tx < n)
    throw ConfigError("part4 config: grid covers only " + std::to_string(cfg.bx * cfg.tx) +
                      " of " + std::to_string(n) + " columns");
  if (cfg.by * cfg.ny < m)
    throw ConfigError("part4 config: grid covers only " + std::to_string(cfg.by * cfg.ny) +
                      " of " + std::to_string(m) + " rows");
}

}  // namespace uot
