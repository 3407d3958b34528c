#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "csid/app/pipeline.hpp"

namespace csid::app {

/// Current model file format. Files with a higher version are rejected.
inline constexpr int kFormatVersion = 1;

/// Versioned JSON with every number written in shortest round-trip form, so
/// reading a file back reproduces all factors bit for bit.
std::string serialize(const ModelArtifact& artifact);
ModelArtifact deserialize(const std::string& text);

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact);
ModelArtifact load_artifact(const std::filesystem::path& path);

}  // namespace csid::app
