#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "evotrade/genome.hpp"

namespace evotrade {

/// Line-oriented `key=value` text, first line `evotrade-genome v1`. Doubles are written in
/// shortest round-trip form, so save/load reproduces every weight bit for bit.
std::string serialize_genome(const Genome& genome);
Genome parse_genome(std::string_view text);

void save_genome(const std::filesystem::path& path, const Genome& genome);
Genome load_genome(const std::filesystem::path& path);

}  // namespace evotrade
