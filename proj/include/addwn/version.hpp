#pragma once

namespace addwn {

inline constexpr const char* kLibraryVersion = "1.0.0";

}  // namespace addwn
