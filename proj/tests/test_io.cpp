#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "jamstress/io/files.hpp"
#include "jamstress/io/forces_csv.hpp"
#include "jamstress/io/vtk.hpp"
#include "support.hpp"

using namespace jamstress;

namespace {

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int parse_line(const std::string& csv, const PolygonalMesh& mesh) {
  try {
    parse_forces_csv(csv, mesh);
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

} // namespace

TEST(ForcesCsv, TwoCellExample) {
  const PolygonalMesh mesh = testing_support::two_cell_mesh();
  const InterfaceForces f = forces_from_stress(-Mat2::Identity(), mesh);
  const std::vector<std::string> l = lines(write_forces_csv(f, mesh));
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[0], kForcesHeader);
  const int eid = mesh.internal_edges[0];
  EXPECT_EQ(l[1], std::to_string(eid) + ",0,1,1,1,0,-1,0,-1,0");
}

TEST(ForcesCsv, RowsSortedAndFullPrecision) {
  const PolygonalMesh mesh = generate_voronoi(random_seeds(15, 3), Rect{}.polygon());
  InterfaceForces f;
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) f.edges.push_back({-1.0 / 3.0 - k, std::nextafter(0.1, 1.0)});
  const std::string csv = write_forces_csv(f, mesh);
  const std::vector<std::string> l = lines(csv);
  ASSERT_EQ(l.size(), mesh.num_internal() + 1);
  int prev = -1;
  for (std::size_t i = 1; i < l.size(); ++i) {
    const int eid = std::stoi(l[i].substr(0, l[i].find(',')));
    EXPECT_GT(eid, prev);
    prev = eid;
  }
  const InterfaceForces back = parse_forces_csv(csv, mesh);
  for (std::size_t k = 0; k < f.edges.size(); ++k) {
    EXPECT_EQ(back.edges[k].normal, f.edges[k].normal);
    EXPECT_EQ(back.edges[k].tangential, f.edges[k].tangential);
  }
}

TEST(ForcesCsv, ParserErrors) {
  const PolygonalMesh mesh = testing_support::two_cell_mesh();
  const std::string csv = write_forces_csv(forces_from_stress(-Mat2::Identity(), mesh), mesh);
  const std::string header(kForcesHeader);
  const std::vector<std::string> l = lines(csv);
  EXPECT_EQ(parse_line("edge,x\n" + l[1] + "\n", mesh), 1);
  EXPECT_EQ(parse_line(header + "\n" + l[1] + ",extra\n", mesh), 2);
  EXPECT_EQ(parse_line(header + "\n" + l[1] + "\n" + l[1] + "\n", mesh), 3);
  std::string bad = l[1];
  bad.replace(bad.find(",-1,0,-1"), 8, ",-1x,0,-1");
  EXPECT_EQ(parse_line(header + "\n" + bad + "\n", mesh), 2);
  EXPECT_EQ(parse_line(header + "\n0,0,1,1,1,0,-1,0,-1,0\n", mesh), 2); // edge 0 is on the boundary
  EXPECT_THROW(parse_forces_csv(header + "\n", mesh), Error);
  EXPECT_THROW(parse_forces_csv("", mesh), ParseError);
  EXPECT_NO_THROW(parse_forces_csv(header + "\r\n" + l[1] + "\r\n", mesh));
}

TEST(MechanismCsv, Format) {
  EXPECT_EQ(write_mechanism_csv({Vec2(-1, 0), Vec2(1, 0.5)}), "cell_id,ux,uy\n0,-1,0\n1,1,0.5\n");
}

TEST(StressVtk, SingleSquare) {
  const Mat2 S = (Mat2() << -1.0, 0.25, 0.25, -2.0).finished();
  const FrictionProblem p = make_problem_from_stress(generate_grid(1, 1), 10.0, S);
  const Reconstruction r = reconstruct_all(InterfaceForces{}, p);
  const std::vector<std::string> l = lines(write_stress_vtk(r.fields));
  EXPECT_EQ(l[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(l[2], "ASCII");
  EXPECT_EQ(l[3], "DATASET UNSTRUCTURED_GRID");
  EXPECT_EQ(l[4], "POINTS 5 double");
  EXPECT_EQ(l[5], "0.5 0.5 0");
  EXPECT_EQ(l[10], "CELLS 4 16");
  EXPECT_EQ(l[11], "3 0 1 2");
  EXPECT_EQ(l[15], "CELL_TYPES 4");
  EXPECT_EQ(l[16], "5");
  EXPECT_EQ(l[20], "CELL_DATA 4");
  EXPECT_EQ(l[21], "SCALARS sigma_11 double 1");
  EXPECT_EQ(l[22], "LOOKUP_TABLE default");
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::stod(l[23 + i]), -1.0, 1e-12);
  EXPECT_EQ(l[27], "SCALARS sigma_12 double 1");
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::stod(l[29 + i]), 0.25, 1e-12);
  EXPECT_EQ(l.back(), "0");
}

TEST(StressVtk, CountsOnVoronoi) {
  const PolygonalMesh mesh = generate_voronoi(random_seeds(20, 2), Rect{}.polygon());
  const FrictionProblem p = make_problem_from_stress(mesh, 10.0, -Mat2::Identity());
  const Reconstruction r = reconstruct_all(forces_from_stress(-Mat2::Identity(), mesh), p);
  std::size_t tris = 0, pts = 0;
  for (const Cell& c : mesh.cells) {
    tris += c.vertex_ids.size();
    pts += c.vertex_ids.size() + 1;
  }
  const std::string vtk = write_stress_vtk(r.fields);
  EXPECT_NE(vtk.find("POINTS " + std::to_string(pts) + " double\n"), std::string::npos);
  EXPECT_NE(vtk.find("CELLS " + std::to_string(tris) + " " + std::to_string(4 * tris) + "\n"), std::string::npos);
  EXPECT_NE(vtk.find("CELL_DATA " + std::to_string(tris) + "\n"), std::string::npos);
  for (const char* name : {"sigma_11", "sigma_12", "sigma_21", "sigma_22"})
    EXPECT_NE(vtk.find(std::string("SCALARS ") + name + " double 1\n"), std::string::npos);
  EXPECT_NE(vtk.find("SCALARS cell_id int 1\n"), std::string::npos);
  EXPECT_EQ(write_stress_vtk(reconstruct_all(forces_from_stress(-Mat2::Identity(), mesh), p, 3).fields), vtk);
}

TEST(Files, RoundTripAndErrors) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "jamstress_io_test";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "a.txt", "x\ny\n");
  EXPECT_EQ(read_text_file(dir / "a.txt"), "x\ny\n");
  EXPECT_THROW(read_text_file(dir / "missing.txt"), Error);
  EXPECT_THROW(write_text_file(dir / "no" / "such" / "dir.txt", "x"), Error);
  std::filesystem::remove_all(dir);
}
