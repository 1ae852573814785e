#pragma once
#include <string>

#include <regpath/l1path.hpp>
#include <regpath/tvspline.hpp>

namespace regpath {

/// JSON document with schema "regpath/1". Numbers carry 17 significant
/// digits, so import_path(export_path(p)) reproduces every double.
std::string export_path(const RegularizationPath& path);
RegularizationPath import_path(const std::string& text);

/// JSON document with schema "regpath-tv/1".
std::string export_tv_path(const SplinePath& path);
SplinePath import_tv_path(const std::string& text);

/// Value of the top-level "schema" field.
std::string document_schema(const std::string& text);

std::string read_text_file(const std::string& filename);
void write_text_file(const std::string& filename, const std::string& text);

PathStatus path_status_from_string(const std::string& name);
TvStatus tv_status_from_string(const std::string& name);

} // namespace regpath
