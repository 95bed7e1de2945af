"""Name Evolution Miner 打包脚本

    pip install -e .          # 开发安装
    pip install -e .[test]    # 附带 pytest / hypothesis
    pip install -e .[dev]     # 测试依赖加上 black / flake8 / mypy
"""

from pathlib import Path

from setuptools import find_packages, setup

HERE = Path(__file__).resolve().parent
VERSION = '1.0.0'
TEST_PACKAGES = ('pytest', 'hypothesis')
DEV_PACKAGES = ['black>=22.0', 'flake8>=4.0', 'mypy>=0.950', 'types-requests', 'types-PyYAML']


def _read(name: str) -> str:
    path = HERE / name
    return path.read_text(encoding='utf-8') if path.is_file() else ''


def load_requirements():
    """从 requirements.txt 读取依赖，拆成 (运行时, 测试) 两组"""
    runtime, testing = [], []
    for line in _read('requirements.txt').splitlines():
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        bucket = testing if line.lower().startswith(TEST_PACKAGES) else runtime
        bucket.append(line)
    return runtime, testing


install_requires, tests_require = load_requirements()

setup(
    name='name-evolution-miner',
    version=VERSION,
    description='从 wiki 更名列表和条目中挖掘名称变更摘录并统计距离分布',
    long_description=_read('README.md'),
    long_description_content_type='text/markdown',
    license='MIT',
    classifiers=[
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3 :: Only',
        'Topic :: Text Processing :: Linguistic',
        'Topic :: Scientific/Engineering :: Information Analysis',
    ],
    keywords='wikipedia entity evolution renaming excerpt',
    python_requires='>=3.9',
    packages=find_packages(exclude=['tests', 'tests.*']),
    py_modules=['main'],
    package_data={'src': ['resources/abbreviations.txt']},
    install_requires=install_requires,
    extras_require={
        'test': tests_require,
        'dev': tests_require + DEV_PACKAGES,
    },
    entry_points={'console_scripts': ['name-evolution=main:main']},
    zip_safe=False,
)
