#pragma once

#include "gpfs/error.hpp"
#include "gpfs/linalg.hpp"
#include "gpfs/rng.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <string>

namespace gpfs::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        std::string name = "gpfs_" + tag;
        if (info != nullptr) name += std::string("_") + info->test_suite_name() + "_" + info->name();
        path_ = std::filesystem::temp_directory_path() / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
}

/// B·Bᵀ + n·I, comfortably positive definite.
inline Matrix random_spd(Rng& rng, std::size_t n) {
    const Matrix b = random_matrix(rng, n, n);
    Matrix a = matmul_nt(b, b);
    for (std::size_t i = 0; i < n; ++i) a(i, i) += static_cast<double>(n);
    return a;
}

#define EXPECT_THROW_KIND(stmt, expected_kind)                              \
    do {                                                                    \
        try {                                                               \
            (void)(stmt);                                                   \
            ADD_FAILURE() << "expected " << ::gpfs::to_string(expected_kind); \
        } catch (const ::gpfs::Error& e) {                                  \
            EXPECT_EQ(e.kind(), expected_kind) << e.what();                 \
        }                                                                   \
    } while (false)

}  // namespace gpfs::test
