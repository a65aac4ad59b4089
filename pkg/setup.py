from setuptools import setup

setup(
    name='cnjgcy',
    version='0.1dev',
    packages=['cnjgcy',],
    python_requires='>=3.11',
    install_requires=['numpy', 'pandas', 'joblib', 'tqdm', 'matplotlib'],
    entry_points={'console_scripts': ['cnjgcy=cnjgcy.cli:run']},
)
