// Copyright 2026 The Ambix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AMBIX_PLOT_H_
#define AMBIX_PLOT_H_

#include <string>
#include <vector>

namespace ambix {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<Series> series;
};

// Standalone SVG document with axes, ticks and a legend.
std::string RenderLinePlot(const LinePlot& plot);

// Scatter of values over (x, y) points coloured on a linear scale, used for
// attention weights over azimuth and colatitude. `marker` (x, y) is drawn as
// a cross when given.
struct HeatPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x, y, value;
  bool has_marker = false;
  double marker_x = 0, marker_y = 0;
};
std::string RenderHeatPlot(const HeatPlot& plot);

void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace ambix

#endif  // AMBIX_PLOT_H_
