#pragma once

#include <string>
#include <string_view>

namespace framekit {

// Random (version 4) UUID in canonical lowercase form.
std::string make_uuid();
bool is_uuid(std::string_view text);

}  // namespace framekit
