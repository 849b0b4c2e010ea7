from setuptools import setup, find_packages

setup(name='fusion-cli',
      version='0.1.0',
      packages=find_packages(exclude=['contrib', 'docs', 'tests*', 'examples*']),
      install_requires=[
          'Click>=7.0',
          'colorama>=0.4.6',
          'numpy>=1.20',
          'scipy>=1.6',
          'PyWavelets>=1.1',
          'scikit-image>=0.19'
      ],
      extras_require={
          'test': ['pytest>=6.0']
      },
      python_requires='>=3.8',
      entry_points={
          'console_scripts': [
              'fusion=fusion_cli.fusion_lib:cli'
          ]
      },
      include_package_data=True)
