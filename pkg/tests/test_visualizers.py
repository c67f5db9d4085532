# -*- coding: utf-8 -*-
"""
Tests for visualizers module.
"""

import numpy as np
import pandas as pd
import pytest
from unittest.mock import patch

from src.visualizers import style, training_charts


@pytest.fixture
def loss_frame():
    return pd.DataFrame({"iter": [0, 1, 2], "loss": [3.0, 2.0, 0.0], "mse": [1.0, 0.5, 0.25]})


def test_plot_loss_curve(loss_frame, tmp_path):
    output = tmp_path / "loss.png"

    with (
        patch("src.visualizers.training_charts.plt") as mock_plt,
        patch("src.visualizers.training_charts.save_plot") as mock_save,
    ):
        training_charts.plot_loss_curve(loss_frame, output, title="粗阶段")

        assert mock_plt.plot.call_count == 2
        mock_plt.yscale.assert_called_with("log")
        mock_save.assert_called_with(output, "粗阶段")
        # 对数轴上非正值被替换为 nan
        plotted = mock_plt.plot.call_args_list[0][0][1]
        assert np.isnan(plotted[2])


def test_plot_loss_curve_empty(tmp_path):
    with patch("src.visualizers.training_charts.save_plot") as mock_save:
        assert training_charts.plot_loss_curve(pd.DataFrame(columns=["iter", "loss"]), tmp_path / "x.png") is None
        assert not mock_save.called


def test_plot_blink_track(tmp_path):
    with (
        patch("src.visualizers.training_charts.plt") as mock_plt,
        patch("src.visualizers.training_charts.save_plot") as mock_save,
    ):
        training_charts.plot_blink_track(np.ones(5), tmp_path / "b.png", reference=np.ones(5), band=np.arange(5.0))

        assert mock_plt.plot.call_count == 3
        scaled = mock_plt.plot.call_args_list[2][0][1]
        np.testing.assert_allclose(scaled, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert mock_save.called


def test_plot_frame_psnr_skips_inf(tmp_path):
    frame = pd.DataFrame({"frame": [3, 7], "psnr": [np.inf, 24.0]})
    with (
        patch("src.visualizers.training_charts.plt") as mock_plt,
        patch("src.visualizers.training_charts.save_plot") as mock_save,
    ):
        training_charts.plot_frame_psnr(frame, tmp_path / "p.png")

        labels = mock_plt.bar.call_args[0][0]
        assert list(labels) == ["7"]
        assert mock_save.called

    all_inf = pd.DataFrame({"frame": [1], "psnr": [np.inf]})
    assert training_charts.plot_frame_psnr(all_inf, tmp_path / "q.png") is None


def test_save_plot_writes_file(tmp_path):
    import matplotlib.pyplot as plt

    plt.figure()
    plt.plot([0, 1], [1, 0])
    path = style.save_plot(tmp_path / "sub" / "fig.png", "标题")
    assert path.exists()


def test_style_config():
    with (
        patch("src.visualizers.style.plt") as mock_plt,
        patch("src.visualizers.style.sns") as mock_sns,
    ):
        style.apply_style()

        assert mock_sns.set_theme.called
        assert mock_plt.rcParams.__setitem__.called


def test_colors():
    assert style.get_color("primary") == style.get_color("unknown")
    assert len(style.get_palette()) == 5
