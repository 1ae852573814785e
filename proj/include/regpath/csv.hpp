#pragma once
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <regpath/dataset.hpp>

namespace regpath {

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;

    Eigen::Index column(const std::string& name) const;
};

/// Header row followed by numeric rows. Quoted fields are accepted.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& filename);

/// Selects the response and feature columns (all other columns when
/// `features` is empty) and validates labels for classification.
Dataset load_csv(const std::string& filename, const std::string& response,
                 const std::vector<std::string>& features, Task task);
Dataset table_to_dataset(const CsvTable& table, const std::string& response,
                         const std::vector<std::string>& features, Task task);

std::string format_csv(const std::vector<std::string>& header, const Eigen::MatrixXd& values);

} // namespace regpath
