#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ved::svg {

struct Series {
  std::string label;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

/// Single line chart.
void line_plot(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
               const std::string& y_label, const std::vector<Series>& series, bool log_y = false);

/// Grid of small line charts, `columns` per row.
void panel_plot(const std::filesystem::path& path, const std::string& title, const std::vector<Panel>& panels,
                int columns = 3);

/// Diverging blue-white-red heat map, colour range symmetric about zero.
void heatmap(const std::filesystem::path& path, const std::string& title, const Eigen::MatrixXd& m);

}  // namespace ved::svg
