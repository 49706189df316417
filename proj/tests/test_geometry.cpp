#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "oracles.hpp"
#include "rca/common/error.hpp"
#include "rca/geometry/calibration.hpp"
#include "rca/geometry/camera.hpp"
#include "rca/geometry/homography.hpp"
#include "rca/geometry/raster.hpp"

using namespace rca;
using namespace rca::geometry;

namespace {

const CameraModel kCam{300.0, 310.0, 320.0, 240.0, 640, 480};

Image gradient_image(int w, int h, int channels) {
  Image img(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 3 + c * 50) % 256);
  return img;
}

Extrinsics random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Extrinsics e;
  e.R = Eigen::AngleAxisd(std::numbers::pi * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized())
            .toRotationMatrix();
  e.t = {u(rng), u(rng), u(rng)};
  return e;
}

}  // namespace

TEST(Projection, PrincipalAxisMapsToPrincipalPoint) {
  const CameraModel cam{100.0, 100.0, 64.0, 64.0, 128, 128};
  const auto px = project_point(cam, Extrinsics{}, {0.0, 0.0, 1.0});
  ASSERT_TRUE(px);
  EXPECT_DOUBLE_EQ(px->x(), 64.0);
  EXPECT_DOUBLE_EQ(px->y(), 64.0);
}

TEST(Projection, MatchesHandWrittenOracle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const auto ext = random_pose(rng);
    const Eigen::Vector3d p(u(rng), u(rng), u(rng));
    const auto px = project_point(kCam, ext, p);
    const double depth = (ext.R * p + ext.t).z();
    if (depth <= 0.0) {
      EXPECT_FALSE(px);
      continue;
    }
    ASSERT_TRUE(px);
    const auto oracle = test::project_by_hand(kCam.fx, kCam.fy, kCam.cx, kCam.cy, ext.R, ext.t, p);
    EXPECT_NEAR((*px - oracle).norm(), 0.0, 1e-9 * std::max(1.0, oracle.norm()));
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(ProjectFootprints, HeadingFilterKeepsSimilarYaw) {
  const CameraModel cam{100.0, 100.0, 64.0, 64.0, 128, 128};
  std::vector<Footprint> fps(3);
  const double yaws[3] = {0.0, 0.1, 1.0};
  for (int i = 0; i < 3; ++i) {
    fps[i].index = i;
    fps[i].yaw = yaws[i];
    fps[i].p_world = {0.0, 0.0, 1.0 + i};
  }
  const auto out = project_footprints(fps, cam, Extrinsics{}, 0.3, 10);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].index, 0);
  EXPECT_EQ(out[1].index, 1);
  for (const auto& f : out) ASSERT_TRUE(f.p_pixel);
}

TEST(ProjectFootprints, YawDifferenceIsWrapped) {
  const CameraModel cam{100.0, 100.0, 64.0, 64.0, 128, 128};
  std::vector<Footprint> fps(2);
  fps[0].yaw = 3.1;
  fps[0].p_world = {0.0, 0.0, 2.0};
  fps[1].yaw = -3.1;
  fps[1].p_world = {0.0, 0.0, 3.0};
  EXPECT_EQ(project_footprints(fps, cam, Extrinsics{}, 0.1, 5).size(), 2u);
}

TEST(ProjectFootprints, KeepsClosestAndDropsInvisible) {
  const CameraModel cam{100.0, 100.0, 64.0, 64.0, 128, 128};
  std::vector<Footprint> fps;
  for (int i = 0; i < 8; ++i) {
    Footprint f;
    f.index = i;
    f.p_world = {0.0, 0.0, 8.0 - i};  // farthest first
    fps.push_back(f);
  }
  Footprint behind;
  behind.index = 100;
  behind.p_world = {0.0, 0.0, -0.5};
  fps.push_back(behind);
  Footprint outside;
  outside.index = 200;
  outside.p_world = {50.0, 0.0, 1.0};
  fps.push_back(outside);

  const auto out = project_footprints(fps, cam, Extrinsics{}, 0.5, 3);
  // the three nearest are the one behind the camera and indices 7, 6
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].index, 7);
  EXPECT_EQ(out[1].index, 6);
  for (const auto& f : out) EXPECT_GT(f.p_world.z(), 0.0);
  EXPECT_TRUE(project_footprints({}, cam, Extrinsics{}, 0.5, 3).empty());
}

TEST(ProjectFootprints, OutputNeverExceedsMOrInput) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Footprint> fps(1 + rng() % 20);
    for (auto& f : fps) {
      f.yaw = 0.2 * u(rng);
      f.p_world = {u(rng), u(rng), 2.0 * u(rng)};
    }
    const std::size_t m = 1 + rng() % 6;
    const auto out = project_footprints(fps, kCam, Extrinsics{}, 0.26, m);
    EXPECT_LE(out.size(), std::min(m, fps.size()));
    for (const auto& f : out) EXPECT_GT(f.p_world.z(), 0.0);
  }
}

TEST(CropPatch, CenteredBoxArithmetic) {
  const auto box = crop_box(512, 512, {256.0, 256.0}, 256, 256);
  ASSERT_TRUE(box);
  EXPECT_EQ(box->x0, 128);
  EXPECT_EQ(box->y0, 128);
  EXPECT_FALSE(crop_box(512, 512, {10.0, 10.0}, 256, 256));
  EXPECT_FALSE(crop_box(512, 512, {400.0, 256.0}, 256, 256));
  EXPECT_THROW(crop_box(512, 512, {256.0, 256.0}, 0, 4), ValidationError);
}

TEST(CropPatch, ContentEqualsSourcePixels) {
  const auto img = gradient_image(200, 150, 3);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 60), h = 1 + static_cast<int>(rng() % 60);
    const Eigen::Vector2d c(static_cast<double>(rng() % 200), static_cast<double>(rng() % 150));
    const auto box = crop_box(img.width, img.height, c, w, h);
    const auto patch = crop_patch(img, c, w, h);
    ASSERT_EQ(bool(box), bool(patch));
    if (!patch) continue;
    ASSERT_EQ(patch->width, w);
    ASSERT_EQ(patch->height, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < 3; ++ch) ASSERT_EQ(patch->at(x, y, ch), img.at(box->x0 + x, box->y0 + y, ch));
  }
}

TEST(Homography, IdentityAndPureRotation) {
  GroundPlane plane;
  plane.normal = {0.0, -1.0, 0.0};
  plane.dist = 1.5;
  EXPECT_TRUE(bev_homography(Extrinsics{}, plane).isApprox(Eigen::Matrix3d::Identity(), 0.0));
  Extrinsics rot;
  rot.R = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  EXPECT_EQ(bev_homography(rot, plane), rot.R);
  plane.dist = 0.0;
  EXPECT_THROW(bev_homography(rot, plane), ValidationError);
}

TEST(Homography, GroundPointsTransferExactlyAndOffPlanePointsDoNot) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto fp = camera_extrinsics({u(rng), u(rng), 1.5}, std::numbers::pi * u(rng), 0.3);
    const double yaw = std::numbers::pi * u(rng);
    const Eigen::Vector3d fwd(std::cos(yaw), std::sin(yaw), 0.0);
    const auto bev = camera_extrinsics(fp.origin_in_source() + 2.0 * fwd + Eigen::Vector3d(0, 0, 2.0), yaw, 1.2);
    const auto plane = ground_plane_in_camera(fp);
    const auto H = bev_homography(relative_extrinsics(fp, bev), plane);

    const Eigen::Vector3d ground = fp.origin_in_source() + (3.0 + u(rng)) * fwd + 0.5 * u(rng) * Eigen::Vector3d(-fwd.y(), fwd.x(), 0.0);
    Eigen::Vector3d g = ground;
    g.z() = 0.0;
    const auto a = project_point(kCam, fp, g), b = project_point(kCam, bev, g);
    if (!a || !b) continue;
    EXPECT_LT((warp_point(*a, H, kCam) - *b).norm(), 1e-6);

    const Eigen::Vector3d lifted = g + Eigen::Vector3d(0.0, 0.0, 0.8);
    const auto la = project_point(kCam, fp, lifted), lb = project_point(kCam, bev, lifted);
    if (!la || !lb) continue;
    EXPECT_GT((warp_point(*la, H, kCam) - *lb).norm(), 1.0);
  }
}

TEST(Homography, WarpThenInverseWarpIsIdentity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto fp = camera_extrinsics({0, 0, 1.4}, 0.3, 0.25);
  const auto bev = camera_extrinsics({2.0, 0.5, 3.0}, 0.3, 1.3);
  const auto H = bev_homography(relative_extrinsics(fp, bev), ground_plane_in_camera(fp));
  const Eigen::Matrix3d Hinv = H.inverse();
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector2d p(320 + 300 * u(rng), 360 + 100 * u(rng));
    const auto q = warp_point(p, H, kCam);
    EXPECT_LT((warp_point(q, Hinv, kCam) - p).norm(), 1e-6);
  }
  EXPECT_LT((warp_point(Eigen::Vector2d(10.0, 20.0), Eigen::Matrix3d::Identity(), kCam) - Eigen::Vector2d(10.0, 20.0)).norm(), 1e-12);
}

TEST(Homography, PointAtInfinityIsAnError) {
  Eigen::Matrix3d H = Eigen::Matrix3d::Identity();
  H(2, 2) = 0.0;
  EXPECT_THROW(warp_point(Eigen::Vector2d(kCam.cx, kCam.cy), H, kCam), NumericError);
}

TEST(WarpImage, IdentityReproducesInput) {
  const CameraModel cam{50.0, 50.0, 20.0, 15.0, 40, 30};
  const auto img = gradient_image(40, 30, 3);
  EXPECT_EQ(warp_image_to_bev(img, Eigen::Matrix3d::Identity(), cam, 40, 30), img);
}

TEST(WarpImage, UniformSourceStaysUniformAndMaskMarksFill) {
  const auto fp = camera_extrinsics({0, 0, 1.4}, 0.0, 0.25);
  const auto bev = camera_extrinsics({3.0, 0.0, 4.0}, 0.0, std::numbers::pi / 2 - 1e-9);
  const auto H = bev_homography(relative_extrinsics(fp, bev), ground_plane_in_camera(fp));
  const CameraModel cam{200.0, 200.0, 160.0, 128.0, 320, 256};
  const Image src(320, 256, 3, 77);
  const auto w = warp_image_to_bev_masked(src, H, cam, 320, 256, 5);
  std::size_t valid = 0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 320; ++x) {
      const bool v = w.valid[static_cast<std::size_t>(y) * 320 + x];
      valid += v;
      EXPECT_EQ(w.image.at(x, y, 1), v ? 77 : 5);
    }
  EXPECT_GT(valid, 1000u);
  EXPECT_LT(valid, 320u * 256u);
}

TEST(WarpImage, SingularHomographyIsRejected) {
  const Image img(10, 10, 1, 0);
  EXPECT_THROW(warp_image_to_bev(img, Eigen::Matrix3d::Zero(), kCam, 10, 10), ValidationError);
}

TEST(WarpImage, CheckerboardBecomesEqualSquares) {
  // First-person view of a ground checkerboard with 0.5 m cells, ray cast here.
  const CameraModel cam{200.0, 200.0, 160.0, 128.0, 320, 256};
  const auto fp = camera_extrinsics({0, 0, 1.2}, 0.0, 0.35);
  const auto bev = camera_extrinsics({3.0, 0.0, 4.0}, 0.0, std::numbers::pi / 2 - 1e-9);
  const double cell = 0.5;
  Image src(320, 256, 1, 0);
  const Eigen::Matrix3d Rt = fp.R.transpose();
  const Eigen::Vector3d C = fp.origin_in_source();
  for (int v = 0; v < 256; ++v)
    for (int u = 0; u < 320; ++u) {
      const Eigen::Vector3d ray = Rt * Eigen::Vector3d((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
      if (ray.z() >= 0) continue;
      const Eigen::Vector3d hit = C - C.z() / ray.z() * ray;
      const long ix = std::lround(std::floor(hit.x() / cell)), iy = std::lround(std::floor(hit.y() / cell));
      src.at(u, v) = ((ix + iy) % 2 == 0) ? 230 : 20;
    }
  const auto H = bev_homography(relative_extrinsics(fp, bev), ground_plane_in_camera(fp));

  // Corner oracle: warp the FP pixel of each lattice corner and compare spacings.
  std::vector<double> spacings;
  for (int i = 4; i <= 9; ++i)
    for (int j = -2; j <= 1; ++j) {
      const auto a = project_point(cam, fp, {i * cell, j * cell, 0.0});
      const auto bx = project_point(cam, fp, {(i + 1) * cell, j * cell, 0.0});
      const auto by = project_point(cam, fp, {i * cell, (j + 1) * cell, 0.0});
      ASSERT_TRUE(a && bx && by);
      spacings.push_back((warp_point(*bx, H, cam) - warp_point(*a, H, cam)).norm());
      spacings.push_back((warp_point(*by, H, cam) - warp_point(*a, H, cam)).norm());
    }
  const double expected = cam.fx * cell / 4.0;  // 4 m above the plane
  for (double s : spacings) EXPECT_NEAR(s, expected, 1e-6);

  // Cell centers in the warped image carry the cell's color.
  const auto warped = warp_image_to_bev_masked(src, H, cam, 320, 256);
  for (int i = 5; i <= 8; ++i)
    for (int j = -2; j <= 1; ++j) {
      const auto c = project_point(cam, bev, {(i + 0.5) * cell, (j + 0.5) * cell, 0.0});
      ASSERT_TRUE(c);
      const int x = static_cast<int>(std::lround(c->x())), y = static_cast<int>(std::lround(c->y()));
      ASSERT_TRUE(warped.valid[static_cast<std::size_t>(y) * 320 + x]);
      EXPECT_EQ(warped.image.at(x, y), ((i + j) % 2 == 0) ? 230 : 20) << i << "," << j;
    }
}

TEST(CameraFrames, ExtrinsicsAndPlaneAreConsistent) {
  const auto ext = camera_extrinsics({1.0, 2.0, 1.3}, 0.7, 0.2);
  EXPECT_NO_THROW(ext.validate());
  EXPECT_TRUE(ext.origin_in_source().isApprox(Eigen::Vector3d(1.0, 2.0, 1.3), 1e-12));
  const auto plane = ground_plane_in_camera(ext);
  EXPECT_NEAR(plane.dist, 1.3, 1e-12);
  for (const Eigen::Vector3d g : {Eigen::Vector3d(4, 5, 0), Eigen::Vector3d(-3, 1, 0)})
    EXPECT_NEAR(plane.normal.dot(ext.apply(g)) + plane.dist, 0.0, 1e-12);
  // the camera looks along its yaw, slightly down
  const auto ahead = project_point(kCam, ext, Eigen::Vector3d(1.0, 2.0, 1.3) + 10.0 * Eigen::Vector3d(std::cos(0.7), std::sin(0.7), 0.0));
  ASSERT_TRUE(ahead);
  EXPECT_NEAR(ahead->x(), kCam.cx, 1e-9);
  EXPECT_LT(ahead->y(), kCam.cy);
}

TEST(CameraFrames, RayPlaneIntersectionInvertsProjection) {
  const auto ext = camera_extrinsics({0, 0, 1.2}, 0.0, 0.3);
  const auto plane = ground_plane_in_camera(ext);
  const auto px = project_point(kCam, ext, {4.0, -0.7, 0.0});
  ASSERT_TRUE(px);
  const auto hit = ray_plane_intersection(kCam, *px, plane);
  ASSERT_TRUE(hit);
  EXPECT_LT((ext.inverse().apply(*hit) - Eigen::Vector3d(4.0, -0.7, 0.0)).norm(), 1e-9);
  EXPECT_FALSE(ray_plane_intersection(kCam, {kCam.cx, 0.0}, plane));  // above the horizon
}

TEST(Validation, RejectsBadCalibrationParts) {
  EXPECT_THROW((CameraModel{0.0, 1.0, 1.0, 1.0, 4, 4}.validate()), ValidationError);
  EXPECT_THROW((CameraModel{1.0, 1.0, 5.0, 1.0, 4, 4}.validate()), ValidationError);
  Extrinsics bad;
  bad.R(0, 0) = 1.1;
  EXPECT_THROW(bad.validate(), ValidationError);
  Extrinsics reflect;
  reflect.R(2, 2) = -1.0;
  EXPECT_THROW(reflect.validate(), ValidationError);
  GroundPlane p;
  p.normal = {0.0, 2.0, 0.0};
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Calibration, JsonRoundTrip) {
  Calibration c;
  c.camera = kCam;
  c.extrinsics = camera_extrinsics({0, 0, 1.2}, 0.0, 0.21);
  c.plane = ground_plane_in_camera(c.extrinsics);
  const auto back = calibration_from_json(to_json(c));
  EXPECT_EQ(back.camera.fx, c.camera.fx);
  EXPECT_EQ(back.camera.width, c.camera.width);
  EXPECT_EQ(back.extrinsics.R, c.extrinsics.R);
  EXPECT_EQ(back.extrinsics.t, c.extrinsics.t);
  EXPECT_EQ(back.plane.normal, c.plane.normal);
  EXPECT_EQ(back.plane.dist, c.plane.dist);
  auto j = to_json(c);
  j["camera"]["fx"] = -1.0;
  EXPECT_THROW(calibration_from_json(j), ValidationError);
}

TEST(Raster, PnmRoundTrip) {
  const auto rgb = gradient_image(13, 7, 3);
  EXPECT_EQ(decode_pnm(encode_pnm(rgb)), rgb);
  const auto gray = gradient_image(5, 9, 1);
  EXPECT_EQ(decode_pnm(encode_pnm(gray)), gray);
  EXPECT_EQ(encode_pnm(gray).substr(0, 2), "P5");
  Image ab(2, 1, 1);
  ab.data = {'a', 'b'};
  EXPECT_EQ(decode_pnm("P5\n# comment\n2 1\n255\nab"), ab);
  EXPECT_THROW(decode_pnm("P6\n2 2\n255\nxx"), ValidationError);
  EXPECT_THROW(decode_pnm("P3\n1 1\n255\n0 0 0"), ValidationError);
}
