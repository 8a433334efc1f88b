#pragma once

namespace rwi {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace rwi
