#include "seldsynth/imageio.hpp"

#include <fmt/format.h>
#include <jpeglib.h>
#include <png.h>

#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

#include "seldsynth/errors.hpp"

namespace seldsynth {

namespace {

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
    std::string e = path.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e == ext;
}

Raster read_png_file(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;

    if (!png_image_begin_read_from_file(&image, path.string().c_str()))
        throw AssetError(fmt::format("cannot read PNG '{}': {}", path.string(),
                                     image.message));

    image.format = PNG_FORMAT_RGBA;
    Raster raster(static_cast<int>(image.width), static_cast<int>(image.height), 4);
    if (!png_image_finish_read(&image, nullptr, raster.data.data(), 0, nullptr)) {
        std::string message = image.message;
        png_image_free(&image);
        throw AssetError(fmt::format("cannot decode PNG '{}': {}", path.string(), message));
    }
    return raster;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

Raster read_jpeg_file(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> file(
        std::fopen(path.string().c_str(), "rb"), std::fclose);
    if (!file)
        throw AssetError(fmt::format("cannot open JPEG '{}'", path.string()));

    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;

    Raster raster;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw AssetError(
            fmt::format("cannot decode JPEG '{}': {}", path.string(), err.message));
    }

    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, file.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    raster = Raster(static_cast<int>(cinfo.output_width),
                    static_cast<int>(cinfo.output_height), 3);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = raster.data.data() +
                       static_cast<std::size_t>(cinfo.output_scanline) *
                           raster.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return raster;
}

}  // namespace

Raster read_image(const std::filesystem::path& path) {
    if (has_extension(path, ".png")) return read_png_file(path);
    if (has_extension(path, ".jpg") || has_extension(path, ".jpeg"))
        return read_jpeg_file(path);
    throw AssetError(fmt::format("unsupported image format '{}'", path.string()));
}

void write_png(const std::filesystem::path& path, const Raster& raster) {
    if (raster.channels != 3 && raster.channels != 4)
        throw AssetError("write_png expects an RGB or RGBA raster");

    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(raster.width);
    image.height = static_cast<png_uint_32>(raster.height);
    image.format = raster.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;

    if (!png_image_write_to_file(&image, path.string().c_str(), 0, raster.data.data(),
                                 0, nullptr))
        throw AssetError(
            fmt::format("cannot write PNG '{}': {}", path.string(), image.message));
}

}  // namespace seldsynth
