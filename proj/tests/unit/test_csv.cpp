#include <gtest/gtest.h>

#include "nel/errors.hpp"
#include "nel/tools/csv.hpp"

namespace nel::tools {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_csv(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(Csv, LabelsWithAnEmptyCell) {
  const CsvData d = parse_csv("f0,f1,label\n1,2,a\n3,4,\n5,6,b\n");
  EXPECT_EQ(d.points.rows(), 2);
  EXPECT_EQ(d.points.cols(), 3);
  EXPECT_TRUE(d.has_label_column);
  ASSERT_EQ(d.labels.size(), 3u);
  EXPECT_EQ(d.labels[0], "a");
  EXPECT_FALSE(d.labels[1].has_value());
  EXPECT_EQ(d.labels[2], "b");
  EXPECT_EQ(d.points(1, 2), 6.0);
}

TEST(Csv, NoLabelColumnMeansUnlabeled) {
  const CsvData d = parse_csv("f0,f1,f2\n1,2,3\n-4e-1,5,6\n");
  EXPECT_FALSE(d.has_label_column);
  EXPECT_EQ(d.points.rows(), 3);
  EXPECT_EQ(d.points(0, 1), -0.4);
  for (const auto& l : d.labels) EXPECT_FALSE(l.has_value());
}

TEST(Csv, MalformedCellNamesRowAndColumn) {
  const std::string e = error_of("f0,f1\n1,2\n3,1.2.3\n");
  EXPECT_NE(e.find("row 2"), std::string::npos) << e;
  EXPECT_NE(e.find("column f1"), std::string::npos) << e;
  EXPECT_NE(e.find("1.2.3"), std::string::npos) << e;
}

TEST(Csv, StructuralErrors) {
  EXPECT_NE(error_of(""), "");
  EXPECT_NE(error_of("1,2\n3,4\n"), "");          // no header
  EXPECT_NE(error_of("f0,f1\n1,2\n3\n"), "");     // ragged row
  EXPECT_NE(error_of("label\na\n"), "");          // no features
  EXPECT_NE(error_of("f0,f2\n1,2\n"), "");        // wrong feature names
  EXPECT_NE(error_of("f0,f1\n1,\n"), "");         // empty feature cell
  EXPECT_NE(error_of("f0\nnan\n"), "");           // non-finite
  EXPECT_THROW(read_csv("/nonexistent/file.csv"), DataError);
}

TEST(Csv, LabelMappingInFirstAppearanceOrder) {
  const LabelMapping m = map_labels({"z", std::nullopt, "a", "z", std::nullopt});
  EXPECT_EQ(m.names, (std::vector<std::string>{"z", "a"}));
  EXPECT_EQ(m.ids, (std::vector<int>{0, -1, 1, 0, -1}));
}

TEST(Csv, FormatRoundTrips) {
  Matrix p(2, 3);
  p << 0.1, -1e-300, 3.0, 1.0 / 3.0, 2.5e10, -0.0;
  const std::vector<std::string> labels{"x", "", "y"};
  const CsvData d = parse_csv(format_csv(p, &labels));
  EXPECT_EQ(d.points, p);
  EXPECT_EQ(d.labels[0], "x");
  EXPECT_FALSE(d.labels[1].has_value());
  const CsvData bare = parse_csv(format_csv(p, nullptr));
  EXPECT_FALSE(bare.has_label_column);
  EXPECT_EQ(bare.points, p);
}

TEST(Csv, ShortestDoubleForm) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  for (double v : {1.0 / 7.0, 6.02214076e23, -2.5e-8}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
}  // namespace nel::tools
